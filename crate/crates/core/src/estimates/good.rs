use serde::{Deserialize, Serialize};

use super::{
    proportion, require_samples, run_samples, EstimateReport, Model, SampleTable, Verdict,
};
use crate::error::{Error, Result};
use crate::graph::{EdgeSet, VertexId};
use crate::operator::{AssembledOperator, CouplingAssignment};
use crate::spectral::{distance_to_spectrum, BlockNormOptions, Resolvent, RESONANCE_TOL};

/// Outcome of the (n, λ, ω)-good test for one ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodBallVerdict {
    pub center: VertexId,
    pub r: f64,
    pub lambda: f64,
    pub n: f64,
    /// ‖1_{Λout} (H^{Λ_r(v)} − λ)^{-1} 1_{Λint}‖; None when λ is resonant
    pub norm: Option<f64>,
    pub resonance_distance: f64,
    pub resonant: bool,
    pub good: bool,
}

pub(crate) struct BallData {
    pub op: AssembledOperator,
    pub int: EdgeSet,
    pub out: EdgeSet,
}

impl BallData {
    pub fn new(model: &Model, omega: &CouplingAssignment, v: VertexId, r: f64) -> Result<Self> {
        let limit = 24.0 * model.graph.big_u();
        if r < limit {
            return Err(Error::Invalid(format!(
                "good-ball radius {r} is below 24U = {limit}"
            )));
        }
        let op = model.ball_operator(omega, v, r)?;
        let (int, out) = model.graph.interior_exterior(v, r)?;
        Ok(BallData { op, int, out })
    }

    pub fn verdict(&self, v: VertexId, r: f64, lambda: f64, n: f64) -> Result<GoodBallVerdict> {
        let dist = distance_to_spectrum(&self.op, lambda);
        let mut out = GoodBallVerdict {
            center: v,
            r,
            lambda,
            n,
            norm: None,
            resonance_distance: dist,
            resonant: dist <= RESONANCE_TOL,
            good: false,
        };
        if out.resonant {
            return Ok(out);
        }
        let res = match Resolvent::new(&self.op, lambda) {
            Ok(res) => res,
            Err(Error::Resonance { .. }) | Err(Error::Singular) => {
                out.resonant = true;
                return Ok(out);
            }
            Err(e) => return Err(e),
        };
        let norm = res
            .block_norm(&self.out, &self.int, &BlockNormOptions::default())?
            .value;
        out.norm = Some(norm);
        out.good = norm <= r.powf(-n);
        Ok(out)
    }
}

/// Classifies Λ_r(v) as (n, λ, ω)-good or bad. Needs r ≥ 24U; a λ within
/// 1e-10 of σ(H^{Λ_r(v)}(ω)) is reported resonant and bad.
pub fn is_good_ball(
    model: &Model,
    omega: &CouplingAssignment,
    v: VertexId,
    r: f64,
    lambda: f64,
    n: f64,
) -> Result<GoodBallVerdict> {
    BallData::new(model, omega, v, r)?.verdict(v, r, lambda, n)
}

/// Monte-Carlo estimate of P{∀λ ∈ grid: Λ_r(v1) or Λ_r(v2) is good}, compared
/// with 1 − r^{−2ξ}.
#[allow(clippy::too_many_arguments)]
pub fn estimate_g(
    model: &Model,
    grid: &[f64],
    r: f64,
    n: f64,
    xi: f64,
    v1: VertexId,
    v2: VertexId,
    n_samples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    require_samples(n_samples)?;
    if grid.is_empty() {
        return Err(Error::Invalid("empty energy grid".into()));
    }
    let (b1, b2) = (model.ball(v1, r)?, model.ball(v2, r)?);
    if b1.edges().intersects(b2.edges()) {
        return Err(Error::Geometry(format!(
            "balls of radius {r} around {v1} and {v2} share edges"
        )));
    }
    let rows = run_samples(n_samples, seed, |k, s| {
        let omega = model.sample(s);
        let d1 = BallData::new(model, &omega, v1, r)?;
        let d2 = BallData::new(model, &omega, v2, r)?;
        for &lam in grid {
            if !d1.verdict(v1, r, lam, n)?.good && !d2.verdict(v2, r, lam, n)?.good {
                return Ok(vec![k as f64, 0.0, lam]);
            }
        }
        Ok(vec![k as f64, 1.0, f64::NAN])
    })?;
    let good = rows.iter().filter(|row| row[1] == 1.0).count();
    let (p, se) = proportion(good, n_samples);
    let bound = 1.0 - r.powf(-2.0 * xi);
    let mut rep = EstimateReport::new("good_pair", n_samples, seed);
    rep.p_hat = Some(p);
    rep.se = Some(se);
    rep.bound = Some(bound);
    rep.verdict = Verdict::from(p + 2.0 * se >= bound);
    rep.x_name = "r".into();
    rep.points.push(super::ReportPoint {
        x: r,
        estimate: p,
        se,
        bound,
        verdict: rep.verdict,
        extra: Default::default(),
    });
    rep.samples = SampleTable {
        rows,
        ..SampleTable::new(&["sample", "good_pair", "first_bad_lambda"])
    };
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceVerdict {
    pub distance: f64,
    pub threshold: f64,
    pub resonant: bool,
}

/// dist ≤ ½ r^{−θn} (closed).
pub fn is_resonant(distance: f64, r: f64, theta: f64, n: f64) -> bool {
    distance <= 0.5 * r.powf(-theta * n)
}

/// λ-resonance of an operator at scale r.
pub fn resonance_test(
    op: &AssembledOperator,
    lambda: f64,
    r: f64,
    theta: f64,
    n: f64,
) -> ResonanceVerdict {
    let distance = distance_to_spectrum(op, lambda);
    ResonanceVerdict {
        distance,
        threshold: 0.5 * r.powf(-theta * n),
        resonant: is_resonant(distance, r, theta, n),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::graph::{build_lattice_graph, Edge, MetricGraph};
    use crate::operator::{ConditionMap, ConditionSpec, RandomPotentialSpec};
    use crate::spectral::kth_eigenvalue;

    fn chain(ext: usize, len: f64) -> Model {
        let g = Arc::new(build_lattice_graph(1, ext, len).unwrap());
        let conds = ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff).unwrap();
        Model::new(g, conds, RandomPotentialSpec::uniform(1.0, 2.0)).with_mesh(len / 16.0)
    }

    #[test]
    fn deep_below_spectrum_is_good() {
        // unit-half edges: U = 0.5, so r = 20 is admissible
        let m = chain(50, 0.5);
        let o = m.graph.vertex_at(&[0]).unwrap();
        let q = 1.0;
        let omega = CouplingAssignment::constant(m.graph.n_edges(), q);
        let lam = -10.0;
        let v = is_good_ball(&m, &omega, o, 20.0, lam, 1.0).unwrap();
        assert!(v.good && !v.resonant);
        // free Green's function e^{−k|x−y|}/(2k) dominates the Dirichlet one; its
        // Hilbert–Schmidt norm over Λint × Λout bounds the block norm
        let k = (q - lam).sqrt();
        // Λint = [−7, 7], Λout = ±[18.5, 20]
        let (a, b) = (7.0, 18.5);
        let hs = (-k * (b - a)).exp() / (2.0 * k) * (2.0 * a * 2.0 * 1.5f64).sqrt();
        assert!(v.norm.unwrap() <= hs * 1.01, "{:?} vs {hs}", v.norm);
        assert!(v.resonance_distance >= 11.0 - 1e-9);
    }

    #[test]
    fn eigenvalue_is_bad_and_n0_is_unit_threshold() {
        let m = chain(50, 0.5);
        let o = m.graph.vertex_at(&[0]).unwrap();
        let omega = m.sample(3);
        let op = m.ball_operator(&omega, o, 12.0).unwrap();
        let e = kth_eigenvalue(&op, 2).unwrap();
        let v = is_good_ball(&m, &omega, o, 12.0, e, 1.0).unwrap();
        assert!(v.resonant && !v.good && v.norm.is_none());
        for lam in [0.0, 1.3, 5.0] {
            let v = is_good_ball(&m, &omega, o, 12.0, lam, 0.0).unwrap();
            assert_eq!(v.good, v.norm.unwrap() <= 1.0);
        }
        assert!(is_good_ball(&m, &omega, o, 11.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn verdict_ignores_edge_labels() {
        let m = chain(40, 1.0);
        let g = &m.graph;
        let o = g.vertex_at(&[0]).unwrap();
        let omega = m.sample(11);
        let ne = g.n_edges();
        // reverse the edge numbering
        let edges: Vec<Edge> = (0..ne).rev().map(|e| *g.edge(e)).collect();
        let g2 = Arc::new(MetricGraph::new(g.n_vertices(), edges, g.u(), g.big_u()).unwrap());
        let omega2 = CouplingAssignment {
            omega: (0..ne).rev().map(|e| omega.get(e)).collect(),
            seed: None,
        };
        let m2 = Model::new(
            g2.clone(),
            ConditionMap::uniform(&g2, &ConditionSpec::Kirchhoff).unwrap(),
            m.spec.clone(),
        )
        .with_mesh(m.h);
        for lam in [0.5, 3.0, 7.7] {
            let a = is_good_ball(&m, &omega, o, 24.0, lam, 0.5).unwrap();
            let b = is_good_ball(&m2, &omega2, o, 24.0, lam, 0.5).unwrap();
            assert_eq!(a.good, b.good);
            let (x, y) = (a.norm.unwrap(), b.norm.unwrap());
            assert!((x - y).abs() <= 1e-6 * x, "{x} vs {y}");
        }
    }

    #[test]
    fn good_pair_probability() {
        let m = chain(70, 1.0);
        let g = &m.graph;
        let (v1, v2) = (g.vertex_at(&[-30]).unwrap(), g.vertex_at(&[30]).unwrap());
        let grid = super::super::chebyshev_grid(-3.0, -1.0, 32);
        let rep = estimate_g(&m, &grid, 24.0, 1.0, 1.5, v1, v2, 100, 5).unwrap();
        assert_eq!(rep.p_hat, Some(1.0));
        assert!(rep.verdict.passed());
        let bad = estimate_g(&m, &grid[..2], 24.0, 1000.0, 1.5, v1, v2, 10, 5).unwrap();
        assert_eq!(bad.p_hat, Some(0.0));
        assert!(!bad.verdict.passed());
        assert!(estimate_g(&m, &grid, 24.0, 1.0, 1.5, v1, v2, 0, 5).is_err());
        let near = g.vertex_at(&[10]).unwrap();
        assert!(matches!(
            estimate_g(&m, &grid, 24.0, 1.0, 1.5, v1, near, 5, 5),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn resonance_threshold_is_closed() {
        assert!(is_resonant(0.5 * 10f64.powf(-1.0), 10.0, 0.5, 2.0));
        assert!(!is_resonant(0.0500001, 10.0, 0.5, 2.0));
        let m = chain(20, 1.0);
        let o = m.graph.vertex_at(&[0]).unwrap();
        let op = m.ball_operator(&m.sample(1), o, 8.0).unwrap();
        let e = kth_eigenvalue(&op, 0).unwrap();
        assert!(resonance_test(&op, e, 8.0, 0.5, 2.0).resonant);
        assert!(!resonance_test(&op, e - 1.0, 8.0, 0.5, 2.0).resonant);
    }
}
