use serde::{Deserialize, Serialize};

use super::{linear_fit, Model, Verdict};
use crate::error::{Error, Result};
use crate::graph::{EdgeSet, VertexId};
use crate::operator::{AssembledOperator, CouplingAssignment};
use crate::spectral::{counting, BlockNormOptions, Resolvent};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtPoint {
    pub delta: f64,
    pub norm: f64,
}

/// Decay of ‖1_A (H − λ)^{-1} 1_B‖ with dist(A, B) inside a spectral gap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtDecayReport {
    pub lambda: f64,
    pub gap: (f64, f64),
    /// dist(λ, {s, t})
    pub eta: f64,
    /// sorted by δ
    pub points: Vec<CtPoint>,
    /// fit log‖·‖ = a − c δ over the points with δ > 0
    pub intercept: f64,
    pub rate: f64,
    pub r2: f64,
    pub monotone: bool,
    pub strictly_decreasing: bool,
    /// every value ≤ 1/η
    pub within_resolvent_bound: bool,
    /// √(η (t − s))
    pub rate_form: f64,
    /// C̃ = c / √(η (t − s))
    pub c_tilde: f64,
    /// smallest C_CTA with ‖·‖ ≤ C_CTA η^{-1} e^{−c δ} at every point
    pub c_cta: f64,
    pub verdict: Verdict,
}

/// Measures the block norms of each (A, B) pair at one λ ∈ (s, t), where
/// (s, t) must contain no eigenvalue.
pub fn ct_decay_experiment(
    op: &AssembledOperator,
    lambda: f64,
    gap: (f64, f64),
    pairs: &[(EdgeSet, EdgeSet)],
) -> Result<CtDecayReport> {
    let (s, t) = gap;
    if !(s < lambda && lambda < t) || op.count_below(t) != counting(op, s) {
        return Err(Error::NotInGap(lambda));
    }
    if pairs.is_empty() {
        return Err(Error::Invalid("no region pairs".into()));
    }
    let eta = (lambda - s).min(t - lambda);
    let res = Resolvent::new(op, lambda)?;
    let opts = BlockNormOptions {
        tol: 1e-10,
        max_iter: 2000,
        dense_limit: 128,
    };
    let mut points = pairs
        .iter()
        .map(|(a, b)| {
            Ok(CtPoint {
                delta: op.graph().set_distance(a, b),
                norm: res.block_norm(a, b, &opts)?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|p, q| p.delta.total_cmp(&q.delta));
    let monotone = points
        .windows(2)
        .all(|w| w[1].norm <= w[0].norm * (1.0 + 1e-6) + 1e-300);
    let strictly_decreasing = points.windows(2).all(|w| w[1].norm < w[0].norm);
    let within = points.iter().all(|p| p.norm <= (1.0 + 1e-9) / eta);
    let fit: Vec<&CtPoint> = points
        .iter()
        .filter(|p| p.delta > 0.0 && p.norm > 0.0)
        .collect();
    let (intercept, rate, r2) = if fit.len() >= 2 {
        let xs: Vec<f64> = fit.iter().map(|p| p.delta).collect();
        let ys: Vec<f64> = fit.iter().map(|p| p.norm.ln()).collect();
        let (a, b, r2) = linear_fit(&xs, &ys);
        (a, -b, r2)
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    let rate_form = (eta * (t - s)).sqrt();
    let c_cta = if rate.is_finite() {
        points
            .iter()
            .map(|p| eta * p.norm * (rate * p.delta).exp())
            .fold(0.0, f64::max)
    } else {
        f64::NAN
    };
    let verdict = Verdict::from(monotone && within && (fit.len() < 2 || r2 >= 0.9));
    Ok(CtDecayReport {
        lambda,
        gap,
        eta,
        points,
        intercept,
        rate,
        r2,
        monotone,
        strictly_decreasing,
        within_resolvent_bound: within,
        rate_form,
        c_tilde: rate / rate_form,
        c_cta,
        verdict,
    })
}

/// The three block norms of the geometric resolvent inequality for nested
/// balls Λ_r(v1) ⊆ Λ_s(v) ⊆ Λ_R(x).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GriReport {
    /// ‖1_{Λout_R(x)} G_R 1_{Λint_r(v1)}‖
    pub lhs: f64,
    /// ‖1_{Λout_R(x)} G_R 1_{Λout_s(v)}‖
    pub outer: f64,
    /// ‖1_{Λout_s(v)} G_s 1_{Λint_r(v1)}‖
    pub inner: f64,
    /// lhs / (outer · inner): a lower bound for C_GRU
    pub ratio: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn gri_check(
    model: &Model,
    omega: &CouplingAssignment,
    x: VertexId,
    v: VertexId,
    v1: VertexId,
    big_r: f64,
    s: f64,
    r: f64,
    lambda: f64,
) -> Result<GriReport> {
    let g = &model.graph;
    let ball_big = model.ball(x, big_r)?;
    let ball_s = model.ball(v, s)?;
    let ball_r = model.ball(v1, r)?;
    let (_, out_big) = g.interior_exterior(x, big_r)?;
    let (_, out_s) = g.interior_exterior(v, s)?;
    let (int_r, _) = g.interior_exterior(v1, r)?;
    if !ball_s.edges().is_subset(ball_big.edges()) {
        return Err(Error::Geometry(format!(
            "Λ_{s}({v}) is not inside Λ_{big_r}({x})"
        )));
    }
    if out_big.intersects(ball_s.edges()) {
        return Err(Error::Geometry(format!(
            "Λ_{s}({v}) meets the outer annulus of Λ_{big_r}({x})"
        )));
    }
    if !ball_r.edges().is_subset(ball_s.edges()) {
        return Err(Error::Geometry(format!(
            "Λ_{r}({v1}) is not inside Λ_{s}({v})"
        )));
    }
    let op_big = crate::operator::assemble(&ball_big, &model.conds, &model.spec, omega, model.h)?;
    let op_s = crate::operator::assemble(&ball_s, &model.conds, &model.spec, omega, model.h)?;
    let opts = BlockNormOptions {
        tol: 1e-9,
        max_iter: 2000,
        dense_limit: 128,
    };
    let res_big = Resolvent::new(&op_big, lambda)?;
    let res_s = Resolvent::new(&op_s, lambda)?;
    let lhs = res_big.block_norm(&out_big, &int_r, &opts)?.value;
    let outer = res_big.block_norm(&out_big, &out_s, &opts)?.value;
    let inner = res_s.block_norm(&out_s, &int_r, &opts)?.value;
    let den = outer * inner;
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / den };
    Ok(GriReport {
        lhs,
        outer,
        inner,
        ratio,
    })
}
