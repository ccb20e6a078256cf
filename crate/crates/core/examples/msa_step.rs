//! One Monte-Carlo induction step r → r^α on Z^1 with an energy interval
//! deep in the spectral gap.
use std::sync::Arc;

use qgraph::estimates::{chebyshev_grid, Model};
use qgraph::graph::build_lattice_graph;
use qgraph::msa::{induction_step_experiment, validate_params};
use qgraph::operator::{ConditionMap, ConditionSpec, RandomPotentialSpec};

fn main() -> qgraph::Result<()> {
    let g = Arc::new(build_lattice_graph(1, 90, 1.0)?);
    let m = Model::new(g.clone(), ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff)?, RandomPotentialSpec::power_flat(1.0))
        .with_mesh(0.125);
    let params = validate_params(1.0, 2.0, None)?.params;
    let grid = chebyshev_grid(-20.0, -15.0, 32);
    let rep = induction_step_experiment(&m, &params, &grid, 24.0, 50, 13)?;
    println!("r = {}, R = {:.2}, centers {:?}", rep.r, rep.big_r, rep.centers);
    println!("p̂_r = {:.3} ± {:.3}, p̂_R = {:.3} ± {:.3}", rep.p_hat_r, rep.se_r, rep.p_hat_big, rep.se_big);
    println!("Ω_G (≤ 3 disjoint bad balls) {:.3}, Ω_W (resonant pair) {:.3}, outside proof regime {}, {}", rep.omega_g_freq, rep.omega_w_freq, rep.outside_proof_regime, rep.verdict);
    Ok(())
}
