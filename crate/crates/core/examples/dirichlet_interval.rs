//! A single edge of length π with Dirichlet ends: eigenvalues n² and the
//! counting function ⌊ℓ√λ/π⌋.
use std::f64::consts::PI;
use std::sync::Arc;

use qgraph::graph::{Edge, InducedSubgraph, MetricGraph};
use qgraph::operator::{assemble, ConditionMap, ConditionSpec, CouplingAssignment, RandomPotentialSpec};
use qgraph::spectral::{counting, dirichlet_interval_count, eigenvalues, EigenRange};

fn main() -> qgraph::Result<()> {
    let g = Arc::new(MetricGraph::from_edges(2, vec![Edge { i: 0, j: 1, length: PI }])?);
    let conds = ConditionMap::uniform(&g, &ConditionSpec::Dirichlet)?;
    let spec = RandomPotentialSpec::uniform(1.0, 2.0);
    let op = assemble(&InducedSubgraph::full(g), &conds, &spec, &CouplingAssignment::constant(1, 0.0), PI / 200.0)?;
    for (k, l) in eigenvalues(&op, EigenRange::Lowest(5))?.iter().enumerate() {
        let n = (k + 1) as f64;
        println!("λ_{} = {l:.6}  (n² = {})", k + 1, n * n);
    }
    for lambda in [0.5, 3.0, 10.0, 30.0] {
        println!("n({lambda}) = {}  formula {}", counting(&op, lambda), dirichlet_interval_count(PI, lambda));
    }
    Ok(())
}
