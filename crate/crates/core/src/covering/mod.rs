//! Packings V_{R,r}(v0), the coverings they induce, the fine raster and the
//! container balls absorbing bad regions.

mod containers;
mod packing;

pub use containers::{
    boundary_cover, boundary_cover_desk, build_containers, build_containers_desk, container_radii,
    max_disjoint, BoundaryCover, Container, ContainerSet,
};
pub use packing::{
    cardinality_bounds, fine_raster, maximal_packing, raster_cover_check, verify_covering,
    verify_packing, CoveringCheck, Packing, PackingCheck, RASTER_COVER_MIN, R_GEOM,
};
