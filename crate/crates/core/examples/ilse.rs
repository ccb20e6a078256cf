//! Initial length scale: probability of spectrum within r^{β−2} of σ₀ on
//! balls of Z^1 with the power-flat density.
use std::sync::Arc;

use qgraph::estimates::{ilse_experiment, IlseParams, Model};
use qgraph::graph::build_lattice_graph;
use qgraph::operator::{ConditionMap, ConditionSpec, RandomPotentialSpec};

fn main() -> qgraph::Result<()> {
    let g = Arc::new(build_lattice_graph(1, 20, 1.0)?);
    let m = Model::new(g.clone(), ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff)?, RandomPotentialSpec::power_flat(1.0))
        .with_mesh(1.0 / 16.0);
    let params = IlseParams { radii: vec![8.0, 16.0], beta: 0.1, xi: 1.5, tau: 2.0, d: 1.0, c_p: 2.0, sigma0: None };
    let rep = ilse_experiment(&m, g.vertex_at(&[0]).unwrap(), &params, 200, 5)?;
    println!("σ₀ = {:.6}", rep.fitted["sigma0"]);
    for p in &rep.points {
        println!(
            "r = {:4}: p̂ = {:.3} ± {:.3}, r^-ξ = {:.4}, proof bound on bad = {:.4}  {}",
            p.x, p.estimate, p.se, p.bound, p.extra["proof_upper_bound_bad"], p.verdict
        );
    }
    println!("flags {:?}, verdict {}", rep.flags, rep.verdict);
    Ok(())
}
