//! Eigenvalue counting on a ball of Z^2 against the Weyl bound, and the
//! Kirchhoff/Dirichlet counting gap against 2|E|.
use std::sync::Arc;

use qgraph::graph::{build_lattice_graph, estimate_growth, InducedSubgraph};
use qgraph::operator::{assemble, ConditionMap, ConditionSpec, RandomPotentialSpec};
use qgraph::spectral::{counting_gap_check, weyl_check};

fn main() -> qgraph::Result<()> {
    let g = Arc::new(build_lattice_graph(2, 12, 1.0)?);
    let o = g.vertex_at(&[0, 0]).unwrap();
    let r = 8.0;
    let growth = estimate_growth(&g, &[o], &(1..=10).map(f64::from).collect::<Vec<_>>())?;
    let spec = RandomPotentialSpec::uniform(1.0, 2.0);
    let omega = spec.sample(&g, 7);
    let ball = InducedSubgraph::new(g.clone(), g.ball_edge_set(o, r)?);
    let kir = assemble(&ball, &ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff)?, &spec, &omega, 0.125)?;
    let grid: Vec<f64> = (0..13).map(|k| -2.0 + k as f64).collect();
    let rep = weyl_check(&kir, spec.potential_norm_bound(), growth.c_p, growth.d, r, &grid)?;
    for row in &rep.rows {
        println!("λ = {:5.1}  n = {:4}  Weyl bound = {:9.1}", row.lambda, row.count, row.bound);
    }
    println!("all below the bound: {}", rep.ok);

    let dir = assemble(&ball, &ConditionMap::uniform(&g, &ConditionSpec::Dirichlet)?, &spec, &omega, 0.125)?;
    let gap = counting_gap_check(&kir, &dir, &grid)?;
    println!("max |n_K − n_D| = {} at λ = {} (bound 2|E| = {})", gap.max_gap, gap.at_lambda, gap.bound);
    Ok(())
}
