//! Monte-Carlo Wegner estimate on a 20-edge segment of ℤ¹: mean eigenvalue
//! count in [λ−ε, λ+ε] against ε, with the fitted C_W and log-log slope.
use std::sync::Arc;

use qgraph::estimates::{wegner_experiment, Model};
use qgraph::graph::build_lattice_graph;
use qgraph::operator::{ConditionMap, ConditionSpec, RandomPotentialSpec};

fn main() -> qgraph::Result<()> {
    let lambda: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2.0);
    let g = Arc::new(build_lattice_graph(1, 14, 1.0)?);
    let conds = ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff)?;
    let model =
        Model::new(g.clone(), conds, RandomPotentialSpec::uniform(0.0, 1.0)).with_mesh(1.0 / 16.0);
    let o = g.vertex_at(&[0]).unwrap();
    let sub = g.ball_edge_set(o, 10.0)?;
    let eps: Vec<f64> = (0..9).map(|k| 1e-3 * 10f64.powf(k as f64 / 4.0)).collect();
    let rep = wegner_experiment(&model, &sub, lambda, &eps, 500, 2024)?;
    println!("|E| = {}, λ = {lambda}", sub.len());
    for p in &rep.points {
        println!(
            "ε = {:.2e}  E[Tr] = {:.5} ± {:.5}  bound = {:.5}  {}",
            p.x, p.estimate, p.se, p.bound, p.verdict
        );
    }
    println!(
        "C_W = {:.4}  slope = {:.3}  verdict {}",
        rep.fitted["C_W"], rep.fitted["slope"], rep.verdict
    );
    Ok(())
}
