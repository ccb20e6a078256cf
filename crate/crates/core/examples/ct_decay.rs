//! Combes–Thomas decay of ‖1_A (H − λ)^{-1} 1_B‖ below the spectrum of a chain.
use std::sync::Arc;

use qgraph::estimates::{ct_decay_experiment, Model};
use qgraph::graph::{build_lattice_graph, EdgeSet};
use qgraph::operator::{ConditionMap, ConditionSpec, RandomPotentialSpec};
use qgraph::spectral::ground_energy;

fn main() -> qgraph::Result<()> {
    let g = Arc::new(build_lattice_graph(1, 30, 1.0)?);
    let m = Model::new(g.clone(), ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff)?, RandomPotentialSpec::uniform(1.0, 2.0))
        .with_mesh(1.0 / 16.0);
    let all = EdgeSet::all(&g);
    let op = m.operator_on(&all, &m.sample(1))?;
    let lambda = -0.5;
    let e0 = ground_energy(&op) - 1e-9;
    let end = g.vertex_at(&[-30]).unwrap();
    let a = g.ball_edge_set(end, 2.0)?;
    let pairs = [5.0, 10.0, 20.0, 40.0]
        .iter()
        .map(|&d| Ok((a.clone(), all.difference(&g.ball_edge_set(end, 2.0 + d)?))))
        .collect::<qgraph::Result<Vec<_>>>()?;
    let rep = ct_decay_experiment(&op, lambda, (2.0 * lambda - e0, e0), &pairs)?;
    for p in &rep.points {
        println!("δ = {:4}  ‖·‖ = {:.3e}", p.delta, p.norm);
    }
    println!("η = {:.3}, rate {:.3}, r² = {:.4}, C̃ = {:.3}, {}", rep.eta, rep.rate, rep.r2, rep.c_tilde, rep.verdict);
    Ok(())
}
