//! Numerical checks of the inputs to the multiscale analysis: good balls and
//! the good-pair probability, Wegner and initial-length-scale Monte Carlo,
//! Combes–Thomas decay, the geometric resolvent inequality, Caccioppoli,
//! eigenfunction decay, the cone estimate and weighted norms.

mod decay;
pub(crate) mod good;
mod inequalities;
mod wegner;

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

pub use decay::{ct_decay_experiment, gri_check, CtDecayReport, CtPoint, GriReport};
pub(crate) use good::BallData;
pub use good::{
    estimate_g, is_good_ball, is_resonant, resonance_test, GoodBallVerdict, ResonanceVerdict,
};
pub use inequalities::{
    ball_growth_table, caccioppoli_check, cone_estimate_check, constant_function, eigenfunction,
    eigenfunction_decay_check, summability, weighted_norm, ConeReport, DecayVerdict, GrowthRow,
    Summability,
};
pub use wegner::{ilse_experiment, wegner_experiment, IlseParams};

use crate::error::{Error, Result};
use crate::graph::{EdgeSet, InducedSubgraph, MetricGraph, VertexId};
use crate::operator::{
    assemble, default_mesh, sample_seed, AssembledOperator, ConditionMap, CouplingAssignment,
    RandomPotentialSpec,
};
use crate::spectral::ground_energy;

/// Ambient graph, vertex conditions, coupling law and mesh size: everything
/// needed to realise H^{Λ}(ω) for any induced subgraph Λ and sample ω.
#[derive(Clone, Debug)]
pub struct Model {
    pub graph: Arc<MetricGraph>,
    pub conds: ConditionMap,
    pub spec: RandomPotentialSpec,
    pub h: f64,
}

impl Model {
    pub fn new(graph: Arc<MetricGraph>, conds: ConditionMap, spec: RandomPotentialSpec) -> Self {
        let h = default_mesh(&graph);
        Model {
            graph,
            conds,
            spec,
            h,
        }
    }

    pub fn with_mesh(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn sample(&self, seed: u64) -> CouplingAssignment {
        self.spec.sample(&self.graph, seed)
    }

    /// Λ_r(v), refusing balls that feel the artificial boundary of the box.
    pub fn ball(&self, v: VertexId, r: f64) -> Result<InducedSubgraph> {
        self.graph.check_ball_inside(v, r)?;
        Ok(InducedSubgraph::new(
            self.graph.clone(),
            self.graph.ball_edge_set(v, r)?,
        ))
    }

    pub fn ball_operator(
        &self,
        omega: &CouplingAssignment,
        v: VertexId,
        r: f64,
    ) -> Result<AssembledOperator> {
        assemble(&self.ball(v, r)?, &self.conds, &self.spec, omega, self.h)
    }

    pub fn operator_on(
        &self,
        edges: &EdgeSet,
        omega: &CouplingAssignment,
    ) -> Result<AssembledOperator> {
        assemble(
            &InducedSubgraph::new(self.graph.clone(), edges.clone()),
            &self.conds,
            &self.spec,
            omega,
            self.h,
        )
    }

    /// σ₀ = inf σ(H + q₋ν) computed on the whole box (every operator of the
    /// family lies above it up to discretisation).
    pub fn spectral_floor(&self) -> Result<f64> {
        let omega = CouplingAssignment::constant(self.graph.n_edges(), self.spec.q_minus);
        let op = assemble(
            &InducedSubgraph::full(self.graph.clone()),
            &self.conds,
            &self.spec,
            &omega,
            self.h,
        )?;
        Ok(ground_energy(&op))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl From<bool> for Verdict {
    fn from(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// One row of a report: a scale or ε, the estimate there and its bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportPoint {
    pub x: f64,
    pub estimate: f64,
    pub se: f64,
    pub bound: f64,
    pub verdict: Verdict,
    #[serde(default)]
    pub extra: BTreeMap<String, f64>,
}

/// Per-sample values, written as CSV by the runner.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SampleTable {
    pub fn new(columns: &[&str]) -> Self {
        SampleTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub experiment: String,
    pub n_samples: usize,
    pub seed: u64,
    /// headline estimate (a probability for the probabilistic experiments)
    pub p_hat: Option<f64>,
    pub se: Option<f64>,
    pub bound: Option<f64>,
    pub verdict: Verdict,
    /// fitted constants (C_W, slopes, ...)
    pub fitted: BTreeMap<String, f64>,
    /// name of the abscissa of `points` ("r", "eps", ...)
    pub x_name: String,
    /// name of the estimate column ("p_hat", "mean_trace", ...)
    pub value_name: String,
    pub points: Vec<ReportPoint>,
    pub flags: Vec<String>,
    #[serde(skip)]
    pub samples: SampleTable,
}

impl EstimateReport {
    pub(crate) fn new(experiment: &str, n_samples: usize, seed: u64) -> Self {
        EstimateReport {
            experiment: experiment.into(),
            n_samples,
            seed,
            p_hat: None,
            se: None,
            bound: None,
            verdict: Verdict::Pass,
            fitted: BTreeMap::new(),
            x_name: "x".into(),
            value_name: "p_hat".into(),
            points: Vec::new(),
            flags: Vec::new(),
            samples: SampleTable::default(),
        }
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    /// Summary object with the points keyed by their own names, e.g.
    /// {r, p_hat, se, bound, verdict, ...} for the ILSE.
    pub fn summary_json(&self) -> Value {
        let points: Vec<Value> = self
            .points
            .iter()
            .map(|p| {
                let mut m = Map::new();
                m.insert(self.x_name.clone(), json!(p.x));
                m.insert(self.value_name.clone(), json!(p.estimate));
                m.insert("se".into(), json!(p.se));
                m.insert("bound".into(), json!(p.bound));
                m.insert("verdict".into(), json!(p.verdict));
                for (k, v) in &p.extra {
                    m.insert(k.clone(), json!(v));
                }
                Value::Object(m)
            })
            .collect();
        json!({
            "experiment": self.experiment,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "p_hat": self.p_hat,
            "se": self.se,
            "bound": self.bound,
            "verdict": self.verdict,
            "fitted": self.fitted,
            "flags": self.flags,
            "points": points,
        })
    }
}

/// (p̂, √(p̂(1−p̂)/N)).
pub fn proportion(successes: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let p = successes as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let m = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (m, (var / n as f64).sqrt())
}

/// `k` Chebyshev points of the first kind on [a, b], ascending.
pub fn chebyshev_grid(a: f64, b: f64, k: usize) -> Vec<f64> {
    let (c, w) = (0.5 * (a + b), 0.5 * (b - a));
    let mut g: Vec<f64> = (0..k)
        .map(|j| c - w * (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * k) as f64).cos())
        .collect();
    g.sort_by(f64::total_cmp);
    g
}

/// Least-squares line y = a + b x; returns (a, b, R²).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let b = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (my - b * mx, b, r2)
}

/// Runs `f(k, seed_k)` for k = 0..n in parallel; results come back in
/// sample order whatever the thread count.
pub fn run_samples<T, F>(n: usize, master: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|k| f(k, sample_seed(master, k as u64)))
        .collect()
}

pub(crate) fn require_samples(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Invalid("sample count N must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_nodes() {
        let g = chebyshev_grid(-1.0, 1.0, 4);
        assert_eq!(g.len(), 4);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let c = (std::f64::consts::PI / 8.0).cos();
        assert!((g[3] - c).abs() < 1e-15 && (g[0] + c).abs() < 1e-15);
        assert!(chebyshev_grid(2.0, 3.0, 32)
            .iter()
            .all(|&x| x > 2.0 && x < 3.0));
    }

    #[test]
    fn stats() {
        assert_eq!(proportion(10, 10), (1.0, 0.0));
        let (p, se) = proportion(25, 100);
        assert!((p - 0.25).abs() < 1e-15 && (se - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        let (m, se) = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert!((m - 2.5).abs() < 1e-15);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        let (a, b, r2) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn samples_are_ordered() {
        let a = run_samples(50, 7, |k, s| Ok((k, s))).unwrap();
        assert!(a
            .iter()
            .enumerate()
            .all(|(i, &(k, s))| i == k && s == sample_seed(7, k as u64)));
    }
}
