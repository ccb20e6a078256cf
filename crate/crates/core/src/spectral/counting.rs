use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::eigen::counting_grid;
use crate::error::{invalid, Result};
use crate::operator::AssembledOperator;

/// Weyl-type bound for a ball restriction: for λ ≥ −C_pot
/// (2 + (√λ⁺ + √C_pot) U/π) c_P r^d / u, and 2 c_P r^d / u below.
/// λ⁺ = max(λ, 0) keeps the bound meaningful on [−C_pot, 0).
pub fn weyl_bound(lambda: f64, c_pot: f64, u: f64, big_u: f64, c_p: f64, r: f64, d: f64) -> f64 {
    let vol = c_p * r.powf(d) / u;
    if lambda >= -c_pot {
        (2.0 + (lambda.max(0.0).sqrt() + c_pot.sqrt()) * big_u / PI) * vol
    } else {
        2.0 * vol
    }
}

/// Counting bound for H + W on a finite graph with |E| edges:
/// |E| (2 + U √(λ + ‖W‖) / π) for λ ≥ −‖W‖, 2|E| below.
pub fn perturbed_count_bound(lambda: f64, n_edges: usize, big_u: f64, w_norm: f64) -> f64 {
    let e = n_edges as f64;
    if lambda >= -w_norm {
        e * (2.0 + big_u / PI * (lambda + w_norm).sqrt())
    } else {
        2.0 * e
    }
}

/// The same bound with √λ + ‖W‖ in place of √(λ + ‖W‖) (only meaningful for λ ≥ 0).
pub fn perturbed_count_bound_literal(lambda: f64, n_edges: usize, big_u: f64, w_norm: f64) -> f64 {
    let e = n_edges as f64;
    if lambda >= -w_norm {
        e * (2.0 + big_u / PI * (lambda.max(0.0).sqrt() + w_norm))
    } else {
        2.0 * e
    }
}

/// Dirichlet counting on one interval: ⌊(ℓ/π)√λ⌋ for λ ≥ 0.
pub fn dirichlet_interval_count(length: f64, lambda: f64) -> usize {
    if lambda < 0.0 {
        0
    } else {
        (length / PI * lambda.sqrt()).floor() as usize
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountingRow {
    pub lambda: f64,
    pub count: usize,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountingReport {
    pub rows: Vec<CountingRow>,
    pub ok: bool,
    /// smallest bound − count over the grid
    pub min_margin: f64,
    /// max over the grid of bound / r^d (the fitted C_Weyl)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_weyl: Option<f64>,
    /// max over the grid of count / r^d
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_ratio: Option<f64>,
}

impl CountingReport {
    fn from_rows(rows: Vec<CountingRow>) -> Self {
        let ok = rows.iter().all(|r| r.ok);
        let min_margin = rows
            .iter()
            .map(|r| r.bound - r.count as f64)
            .fold(f64::INFINITY, f64::min);
        CountingReport {
            rows,
            ok,
            min_margin,
            c_weyl: None,
            observed_ratio: None,
        }
    }
}

/// Compares n(λ) against an arbitrary bound function on a grid.
pub fn counting_report(
    op: &AssembledOperator,
    grid: &[f64],
    bound: impl Fn(f64) -> f64,
) -> Result<CountingReport> {
    let counts = counting_grid(op, grid)?;
    let rows = grid
        .iter()
        .zip(counts)
        .map(|(&lambda, count)| {
            let b = bound(lambda);
            CountingRow {
                lambda,
                count,
                bound: b,
                ok: count as f64 <= b,
            }
        })
        .collect();
    Ok(CountingReport::from_rows(rows))
}

/// Weyl check for a ball restriction of radius r.
pub fn weyl_check(
    op: &AssembledOperator,
    c_pot: f64,
    c_p: f64,
    d: f64,
    r: f64,
    grid: &[f64],
) -> Result<CountingReport> {
    let g = op.graph();
    let (u, big_u) = (g.u(), g.big_u());
    let mut rep = counting_report(op, grid, |l| weyl_bound(l, c_pot, u, big_u, c_p, r, d))?;
    let rd = r.powf(d);
    rep.c_weyl = Some(
        rep.rows
            .iter()
            .map(|row| row.bound / rd)
            .fold(0.0, f64::max),
    );
    rep.observed_ratio = Some(
        rep.rows
            .iter()
            .map(|row| row.count as f64 / rd)
            .fold(0.0, f64::max),
    );
    Ok(rep)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapReport {
    pub max_gap: usize,
    pub at_lambda: f64,
    pub bound: usize,
    pub ok: bool,
}

/// max_λ |n₁(λ) − n₂(λ)| for two vertex-condition realisations on the same
/// edges with the same potential; the bound is 2|E|.
pub fn counting_gap_check(
    op1: &AssembledOperator,
    op2: &AssembledOperator,
    grid: &[f64],
) -> Result<GapReport> {
    let same_edges = op1.subgraph().edges() == op2.subgraph().edges()
        && op1
            .subgraph()
            .edges()
            .iter()
            .all(|e| op1.graph().edge(e) == op2.graph().edge(e));
    if !same_edges {
        return invalid("counting gap check needs two operators on the same graph");
    }
    let pot_same = op1
        .edge_blocks()
        .iter()
        .zip(op2.edge_blocks())
        .all(|(a, b)| {
            let (pa, pb) = (a.potential(), b.potential());
            // meshes may differ; compare the mean potential on each edge
            let ma = pa.iter().sum::<f64>() / pa.len() as f64;
            let mb = pb.iter().sum::<f64>() / pb.len() as f64;
            (ma - mb).abs() <= 1e-12 * ma.abs().max(1.0)
        });
    if !pot_same {
        return invalid("counting gap check needs the same potential for both operators");
    }
    let c1 = counting_grid(op1, grid)?;
    let c2 = counting_grid(op2, grid)?;
    let (mut max_gap, mut at_lambda) = (0, grid.first().copied().unwrap_or(0.0));
    for ((&l, a), b) in grid.iter().zip(c1).zip(c2) {
        let gap = a.abs_diff(b);
        if gap > max_gap {
            max_gap = gap;
            at_lambda = l;
        }
    }
    let bound = 2 * op1.subgraph().edges().len();
    Ok(GapReport {
        max_gap,
        at_lambda,
        bound,
        ok: max_gap <= bound,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::graph::{build_lattice_graph, Edge, InducedSubgraph, MetricGraph};
    use crate::operator::{
        assemble, ConditionMap, ConditionSpec, CouplingAssignment, RandomPotentialSpec,
    };
    use crate::spectral::counting;

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn bound_formulas() {
        // below −C_pot only the 2 c_P r^d / u branch is left
        assert_eq!(weyl_bound(-3.0, 2.0, 1.0, 1.0, 3.0, 10.0, 1.0), 60.0);
        let b = weyl_bound(4.0, 1.0, 0.5, 2.0, 1.0, 2.0, 2.0);
        assert!((b - (2.0 + 3.0 * 2.0 / PI) * 8.0).abs() < 1e-12);
        assert_eq!(dirichlet_interval_count(PI, 10.0), 3);
        assert_eq!(dirichlet_interval_count(PI, -1.0), 0);
        assert_eq!(perturbed_count_bound(-5.0, 7, 1.0, 2.0), 14.0);
    }

    #[test]
    fn gap_identical_operators_is_zero() {
        let g = Arc::new(build_lattice_graph(1, 5, 1.0).unwrap());
        let conds = ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff).unwrap();
        let pot = RandomPotentialSpec::uniform(1.0, 2.0);
        let w = pot.sample(&g, 3);
        let sub = InducedSubgraph::full(g.clone());
        let op = assemble(&sub, &conds, &pot, &w, 1.0 / 16.0).unwrap();
        let rep = counting_gap_check(&op, &op, &grid(-5.0, 50.0, 60)).unwrap();
        assert_eq!(rep.max_gap, 0);
        let h = Arc::new(build_lattice_graph(1, 4, 1.0).unwrap());
        let other = assemble(
            &InducedSubgraph::full(h.clone()),
            &ConditionMap::uniform(&h, &ConditionSpec::Kirchhoff).unwrap(),
            &pot,
            &w,
            1.0 / 16.0,
        )
        .unwrap();
        assert!(counting_gap_check(&op, &other, &[1.0]).is_err());
    }

    #[test]
    fn single_edge_dirichlet_vs_neumann() {
        let g = Arc::new(
            MetricGraph::new(
                2,
                vec![Edge {
                    i: 0,
                    j: 1,
                    length: 2.0,
                }],
                2.0,
                2.0,
            )
            .unwrap(),
        );
        let pot = RandomPotentialSpec::uniform(0.0, 1.0);
        let w = CouplingAssignment::constant(1, 0.0);
        let sub = InducedSubgraph::full(g.clone());
        let d = assemble(
            &sub,
            &ConditionMap::uniform(&g, &ConditionSpec::Dirichlet).unwrap(),
            &pot,
            &w,
            1.0 / 64.0,
        )
        .unwrap();
        let neumann = ConditionSpec::Custom {
            p: vec![vec![0.0]],
            l: vec![vec![0.0]],
        };
        let n = assemble(
            &sub,
            &ConditionMap::uniform(&g, &neumann).unwrap(),
            &pot,
            &w,
            1.0 / 64.0,
        )
        .unwrap();
        let rep = counting_gap_check(&d, &n, &grid(-5.0, 50.0, 200)).unwrap();
        assert!(rep.ok && rep.max_gap <= 2 && rep.max_gap >= 1);
        // Neumann counts eigenvalue 0, Dirichlet does not
        assert_eq!(counting(&n, 0.0), 1);
        assert_eq!(counting(&d, 0.0), 0);
    }

    #[test]
    fn weyl_holds_on_small_ball() {
        let g = Arc::new(build_lattice_graph(2, 8, 1.0).unwrap());
        let conds = ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff).unwrap();
        let pot = RandomPotentialSpec::uniform(1.0, 2.0);
        let o = g.vertex_at(&[0, 0]).unwrap();
        let sub = InducedSubgraph::new(g.clone(), g.ball_edge_set(o, 5.0).unwrap());
        let op = assemble(&sub, &conds, &pot, &pot.sample(&g, 4), 1.0 / 16.0).unwrap();
        let rep = weyl_check(
            &op,
            pot.potential_norm_bound(),
            4.0,
            2.0,
            5.0,
            &grid(-2.0, 10.0, 40),
        )
        .unwrap();
        assert!(rep.ok, "{:?}", rep.min_margin);
        assert!(rep.c_weyl.unwrap() > rep.observed_ratio.unwrap());
    }
}
