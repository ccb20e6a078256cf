//! Multiscale-analysis driver: feasibility of the induction parameters,
//! scale schedules, the prefactors of the resolvent chain, and a Monte-Carlo
//! version of the induction step.

mod induction;
mod params;
mod schedule;

pub use induction::{
    disjoint_centers, induction_step_experiment, induction_step_experiment_with, InductionOptions,
    InductionReport,
};
pub use params::{
    construct_params, relations, validate_params, Certificate, Feasible, MsaParams, RelationCheck,
};
pub use schedule::{
    delta_minus, delta_plus, iteration_prefactors, k_plus_lower, ln_delta_minus, ln_delta_plus,
    scale_schedule, FittedConstants, Prefactors,
};
