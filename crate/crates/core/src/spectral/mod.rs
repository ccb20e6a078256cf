//! Eigenvalues, the counting function and its bounds, resolvent block norms.

mod counting;
mod eigen;
mod resolvent;

pub use counting::{
    counting_gap_check, counting_report, dirichlet_interval_count, perturbed_count_bound,
    perturbed_count_bound_literal, weyl_bound, weyl_check, CountingReport, CountingRow, GapReport,
};
pub use eigen::{
    count_in, counting, counting_grid, distance_to_spectrum, eigenpairs, eigenvalues,
    ground_energy, kth_eigenvalue, residual, EigenRange, COUNT_TOL, DENSE_LIMIT,
};
pub use resolvent::{
    check_resonance, resolvent_block_norm, BlockNorm, BlockNormOptions, Resolvent, RESONANCE_TOL,
};
