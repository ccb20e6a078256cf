//! Geometric resolvent inequality ratios over sampled couplings, at two
//! scales a factor 2 apart.
use std::sync::Arc;

use qgraph::estimates::{gri_check, Model};
use qgraph::graph::build_lattice_graph;
use qgraph::operator::{ConditionMap, ConditionSpec, RandomPotentialSpec};

fn main() -> qgraph::Result<()> {
    let g = Arc::new(build_lattice_graph(1, 56, 1.0)?);
    let m = Model::new(g.clone(), ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff)?, RandomPotentialSpec::uniform(1.0, 2.0))
        .with_mesh(0.125);
    let o = g.vertex_at(&[0]).unwrap();
    for (big_r, s, r) in [(24.0, 12.0, 6.0), (48.0, 24.0, 12.0)] {
        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let rep = gri_check(&m, &m.sample(k), o, o, o, big_r, s, r, 0.0)?;
            worst = worst.max(rep.ratio);
        }
        println!("(R, s, r) = ({big_r}, {s}, {r}): max lhs/(outer·inner) = {worst:.4}");
    }
    Ok(())
}
