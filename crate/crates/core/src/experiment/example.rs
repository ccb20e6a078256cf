use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::Verdict;
use crate::graph::{append_pendant_edge, InducedSubgraph, MetricGraph, VertexId};
use crate::operator::{assemble, ConditionMap, CouplingAssignment, Profile, RandomPotentialSpec, VertexCondition};
use crate::spectral::{eigenvalues, ground_energy, EigenRange};

/// Matching tolerance, relative above 1.
pub const EXAMPLE_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PendantRow {
    pub omega: f64,
    /// lowest eigenvalue of the extended operator not explained by the base
    pub lowest_added: f64,
    pub expected: f64,
    pub error: f64,
    /// every base eigenvalue ≤ λ_max found again
    pub base_persists: bool,
    pub max_base_shift: f64,
    /// every n² + ω ≤ λ_max found
    pub pendant_found: bool,
    /// #σ(H̃) = #σ(H) + #{n² + ω} below λ_max
    pub counts_match: bool,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example101Report {
    /// inf σ of the base Laplacian without potential
    pub s0: f64,
    /// single-site profile height on the base edges
    pub nu: f64,
    /// inf σ(H(ω)) of the base with its sampled potential
    pub base_ground: f64,
    pub base_eigenvalues: Vec<f64>,
    pub lambda_max: f64,
    pub rows: Vec<PendantRow>,
    pub verdict: Verdict,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= EXAMPLE_TOL * b.abs().max(1.0)
}

/// Greedy matching of `want` into `have` (both ascending); returns the unused
/// entries of `have` and whether every wanted value found a partner.
fn match_into(have: &[f64], want: &[f64]) -> (Vec<f64>, bool, f64) {
    let mut used = vec![false; have.len()];
    let mut all = true;
    let mut worst: f64 = 0.0;
    for &w in want {
        let best = (0..have.len())
            .filter(|&i| !used[i])
            .min_by(|&i, &j| (have[i] - w).abs().total_cmp(&(have[j] - w).abs()));
        match best {
            Some(i) if close(have[i], w) => {
                used[i] = true;
                worst = worst.max((have[i] - w).abs());
            }
            _ => all = false,
        }
    }
    let rest = have.iter().zip(&used).filter(|(_, &u)| !u).map(|(&x, _)| x).collect();
    (rest, all, worst)
}

/// Base graph with the potential (3 − s₀)·ω_e (or ω_e when s₀ ≥ 3) and the
/// power-flat law on [1, 2]; then a π-edge with Dirichlet ends and ν = 1 is
/// hung at `v`. Its Dirichlet eigenvalues n² + ω_ẽ join the base spectrum
/// unchanged and the lowest of them, 1 + ω_ẽ, is the bottom of the spectrum.
#[allow(clippy::too_many_arguments)]
pub fn reproduce_example_10_1(
    g: &Arc<MetricGraph>,
    conds: &ConditionMap,
    d: f64,
    v: VertexId,
    omegas: &[f64],
    lambda_max: f64,
    h: f64,
    seed: u64,
) -> Result<Example101Report> {
    if omegas.is_empty() {
        return Err(Error::Invalid("no pendant couplings given".into()));
    }
    let full = InducedSubgraph::full(g.clone());
    let free = RandomPotentialSpec::uniform(1.0, 2.0);
    let s0 = ground_energy(&assemble(&full, conds, &free, &CouplingAssignment::constant(g.n_edges(), 0.0), h)?);
    let nu = if s0 < 3.0 { 3.0 - s0 } else { 1.0 };
    let spec = RandomPotentialSpec::power_flat(d).with_profile(Profile::Constant(nu));
    let omega = spec.sample(g, seed);
    let base_op = assemble(&full, conds, &spec, &omega, h)?;
    let base_ground = ground_energy(&base_op);
    let base = eigenvalues(&base_op, EigenRange::Interval(base_ground - 1.0, lambda_max))?;

    let gt = Arc::new(append_pendant_edge(g, v, PI)?);
    let et = g.n_edges();
    let leaf = g.n_vertices();
    if gt.ends(v).last().map(|end| end.edge) != Some(et) {
        return Err(Error::Invalid("pendant edge is not the last end at its vertex".into()));
    }
    let mut ct = ConditionMap::empty(&gt);
    for w in 0..g.n_vertices() {
        let c = conds.get(w).ok_or(Error::MissingCondition(w))?;
        let c = if w == v { c.direct_sum(&VertexCondition::dirichlet(1)) } else { c.clone() };
        ct.set(&gt, w, c)?;
    }
    ct.set(&gt, leaf, VertexCondition::dirichlet(1))?;
    let mut spec_t = spec.clone();
    spec_t.profiles.insert(et, Profile::Constant(1.0));
    let full_t = InducedSubgraph::full(gt.clone());

    let mut rows = Vec::with_capacity(omegas.len());
    for &w in omegas {
        let mut om = omega.clone();
        om.extend(et + 1, w);
        om.set(et, w);
        let op = assemble(&full_t, &ct, &spec_t, &om, h)?;
        let lo = ground_energy(&op) - 1.0;
        let all = eigenvalues(&op, EigenRange::Interval(lo, lambda_max))?;
        let (rest, base_persists, max_base_shift) = match_into(&all, &base);
        let pendant: Vec<f64> = (1..).map(|n: i32| f64::from(n * n) + w).take_while(|&x| x <= lambda_max).collect();
        let (extra, pendant_found, _) = match_into(&rest, &pendant);
        let lowest_added = rest.first().copied().unwrap_or(f64::NAN);
        let expected = 1.0 + w;
        let error = (lowest_added - expected).abs();
        let counts_match = extra.is_empty() && all.len() == base.len() + pendant.len();
        let ok = error <= EXAMPLE_TOL && base_persists && pendant_found;
        rows.push(PendantRow {
            omega: w,
            lowest_added,
            expected,
            error,
            base_persists,
            max_base_shift,
            pendant_found,
            counts_match,
            verdict: ok.into(),
        });
    }
    let verdict = rows.iter().all(|r| r.verdict.passed()).into();
    Ok(Example101Report { s0, nu, base_ground, base_eigenvalues: base, lambda_max, rows, verdict })
}
