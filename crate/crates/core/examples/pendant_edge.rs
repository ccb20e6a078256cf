//! A π-edge with Dirichlet ends hung on a chain: its eigenvalues n² + ω
//! join the base spectrum and 1 + ω becomes the bottom.
use std::sync::Arc;

use qgraph::experiment::reproduce_example_10_1;
use qgraph::graph::build_lattice_graph;
use qgraph::operator::{ConditionMap, ConditionSpec};

fn main() -> qgraph::Result<()> {
    let g = Arc::new(build_lattice_graph(1, 5, 1.0)?);
    let conds = ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff)?;
    let v = g.vertex_at(&[0]).unwrap();
    let rep = reproduce_example_10_1(&g, &conds, 1.0, v, &[1.0, 1.5, 2.0], 20.0, 1.0 / 64.0, 3)?;
    println!("s0 = {:.2e}, ν = {}, base ground = {:.4}", rep.s0, rep.nu, rep.base_ground);
    for row in &rep.rows {
        println!(
            "ω = {}: lowest added {:.6} (expected {}), base kept {}, counts match {}  {}",
            row.omega, row.lowest_added, row.expected, row.base_persists, row.counts_match, row.verdict
        );
    }
    Ok(())
}
