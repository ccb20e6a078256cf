//! Spectral toolkit for random Schrödinger operators on metric graphs.
//!
//! The crate builds metric graphs (lattice and Cayley boxes, arbitrary
//! multigraphs), discretizes Laplacians with general self-adjoint vertex
//! conditions plus alloy-type random potentials, and checks numerically the
//! estimates that drive a multiscale analysis: counting-function bounds,
//! Combes–Thomas decay, the geometric resolvent inequality, Wegner and
//! initial-length-scale estimates, and the feasibility of the induction
//! parameters.

pub mod covering;
pub mod error;
pub mod estimates;
pub mod experiment;
pub mod graph;
pub mod linalg;
pub mod msa;
pub mod operator;
pub mod spectral;

pub use error::{Error, Result};
