//! Probability that one of two disjoint balls is good at every energy of a
//! grid, below the spectrum and near its bottom.
use std::sync::Arc;

use qgraph::estimates::{chebyshev_grid, estimate_g, Model};
use qgraph::graph::build_lattice_graph;
use qgraph::operator::{ConditionMap, ConditionSpec, RandomPotentialSpec};

fn main() -> qgraph::Result<()> {
    let g = Arc::new(build_lattice_graph(1, 60, 1.0)?);
    let m = Model::new(g.clone(), ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff)?, RandomPotentialSpec::uniform(1.0, 2.0))
        .with_mesh(0.125);
    let (v1, v2) = (g.vertex_at(&[-28]).unwrap(), g.vertex_at(&[28]).unwrap());
    for (a, b) in [(-3.0, -1.0), (1.0, 1.2)] {
        let grid = chebyshev_grid(a, b, 16);
        let rep = estimate_g(&m, &grid, 24.0, 2.0, 0.75, v1, v2, 30, 11)?;
        println!(
            "I = [{a}, {b}]: p̂ = {:.3} ± {:.3}, need ≥ {:.4}  {}",
            rep.p_hat.unwrap(),
            rep.se.unwrap(),
            rep.bound.unwrap(),
            rep.verdict
        );
    }
    Ok(())
}
