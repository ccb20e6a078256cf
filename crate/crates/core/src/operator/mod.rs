//! Vertex conditions, the alloy-type random potential and the finite-element
//! realisation of H^{P,L}(ω) on induced subgraphs.

mod assembly;
mod condition;
mod potential;

pub use assembly::{
    assemble, default_mesh, AssembledOperator, EdgeBlock, EdgeFunction, ShiftedFactor, VertexBlock,
    DEFAULT_MESH_DIVISOR,
};
pub use condition::{ConditionMap, ConditionSpec, VertexCondition};
pub use potential::{sample_seed, CouplingAssignment, Density, Profile, RandomPotentialSpec};

/// Shorthand used by builders that take a condition kind and a degree.
pub fn make_vertex_condition(
    spec: &ConditionSpec,
    degree: usize,
) -> crate::Result<VertexCondition> {
    VertexCondition::from_spec(spec, degree)
}
