use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    linear_fit, mean_se, proportion, require_samples, run_samples, EstimateReport, Model,
    ReportPoint, SampleTable, Verdict,
};
use crate::error::{Error, Result};
use crate::graph::{EdgeSet, VertexId};
use crate::spectral::{count_in, distance_to_spectrum};

/// Monte-Carlo E[Tr 1_{[λ−ε, λ+ε]}(H^{Γ_Ẽ}(ω))] for each ε, with the fitted
/// Wegner constant C_W = max_ε E[Tr]/(s(μ,ε)|Ẽ|) and the log-log slope in ε.
pub fn wegner_experiment(
    model: &Model,
    sub: &EdgeSet,
    lambda: f64,
    eps: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    require_samples(n_samples)?;
    if eps.is_empty() {
        return Err(Error::Invalid("empty ε list".into()));
    }
    if let Some(&e) = eps.iter().find(|&&e| !(e > 0.0 && e <= 0.5)) {
        return Err(Error::Invalid(format!("ε = {e} outside (0, 1/2]")));
    }
    if sub.is_empty() {
        return Err(Error::Invalid("empty edge set".into()));
    }
    let counts = run_samples(n_samples, seed, |_, s| {
        let op = model.operator_on(sub, &model.sample(s))?;
        Ok(eps
            .iter()
            .map(|&e| count_in(&op, lambda - e, lambda + e) as f64)
            .collect::<Vec<f64>>())
    })?;
    let n_edges = sub.len() as f64;
    let c_rho = model.spec.c_rho();
    let mut rep = EstimateReport::new("wegner", n_samples, seed);
    rep.x_name = "eps".into();
    rep.value_name = "mean_trace".into();
    let mut c_w: f64 = 0.0;
    let mut stats = Vec::new();
    for (j, &e) in eps.iter().enumerate() {
        let col: Vec<f64> = counts.iter().map(|row| row[j]).collect();
        let (m, se) = mean_se(&col);
        let s = model.spec.modulus_of_continuity(e);
        c_w = c_w.max(m / (s * n_edges));
        stats.push((e, m, se, s));
    }
    let mut ok = true;
    for &(e, m, se, s) in &stats {
        let lin = 2.0 * e * c_rho;
        let pass = m - 2.0 * se <= c_w * lin * n_edges && s <= lin * (1.0 + 1e-9);
        ok &= pass;
        let mut extra = BTreeMap::new();
        extra.insert("modulus".into(), s);
        extra.insert("two_eps_c_rho".into(), lin);
        rep.points.push(ReportPoint {
            x: e,
            estimate: m,
            se,
            bound: c_w * s * n_edges,
            verdict: pass.into(),
            extra,
        });
    }
    let pos: Vec<&(f64, f64, f64, f64)> = stats.iter().filter(|p| p.1 > 0.0).collect();
    if pos.len() >= 2 {
        let xs: Vec<f64> = pos.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = pos.iter().map(|p| p.1.ln()).collect();
        let (_, slope, r2) = linear_fit(&xs, &ys);
        rep.fitted.insert("slope".into(), slope);
        rep.fitted.insert("slope_r2".into(), r2);
        ok &= (0.8..=1.2).contains(&slope);
    } else if stats.iter().any(|p| p.1 > 0.0) {
        rep.flags.push("slope_undetermined".into());
    }
    rep.fitted.insert("C_W".into(), c_w);
    rep.fitted.insert("c_rho".into(), c_rho);
    rep.fitted.insert("edges".into(), n_edges);
    rep.verdict = Verdict::from(ok);
    let mut table = SampleTable::new(&["sample"]);
    table
        .columns
        .extend(eps.iter().map(|e| format!("count_eps_{e}")));
    table.rows = counts
        .into_iter()
        .enumerate()
        .map(|(k, row)| std::iter::once(k as f64).chain(row).collect())
        .collect();
    rep.samples = table;
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IlseParams {
    pub radii: Vec<f64>,
    pub beta: f64,
    pub xi: f64,
    pub tau: f64,
    /// growth degree and constant: |E(v, r)| ≤ c_P r^d / u
    pub d: f64,
    pub c_p: f64,
    /// σ₀; computed on the whole box at ω ≡ q₋ when absent
    #[serde(default)]
    pub sigma0: Option<f64>,
}

impl IlseParams {
    pub fn validate(&self) -> Result<()> {
        let top = 2.0 * self.tau - self.d;
        if !(self.xi > 0.0 && self.xi < top) {
            return Err(Error::Relation(format!(
                "ξ = {} outside (0, 2τ − d) = (0, {top})",
                self.xi
            )));
        }
        let beta_max = (2.0 * self.tau - self.d - self.xi) / self.tau;
        if !(self.beta > 0.0) {
            return Err(Error::Relation(format!(
                "β = {} must be positive",
                self.beta
            )));
        }
        if self.beta >= beta_max {
            return Err(Error::Relation(format!(
                "β = {} ≥ (2τ − d − ξ)/τ = {beta_max}",
                self.beta
            )));
        }
        if self.radii.is_empty() {
            return Err(Error::Invalid("no radii given".into()));
        }
        Ok(())
    }

    /// 1 − (c_P r^d/u)(h/c₋)^τ with h = r^{β−2}: the proof's lower bound for
    /// the probability that no coupling of E(v, r) sits within h/c₋ of q₋.
    pub fn proof_bound(&self, r: f64, u: f64, c_minus: f64) -> f64 {
        let h = r.powf(self.beta - 2.0);
        1.0 - self.c_p * r.powf(self.d) / u * (h / c_minus).powf(self.tau)
    }

    /// c_P r^{ξ−τ(2−β)+d} / (u c₋^τ); the proof needs this ≤ 1.
    pub fn proof_factor(&self, r: f64, u: f64, c_minus: f64) -> f64 {
        self.c_p * r.powf(self.xi - self.tau * (2.0 - self.beta) + self.d)
            / (u * c_minus.powf(self.tau))
    }
}

/// Monte-Carlo P{dist(σ(H^{Λ_r(v)}(ω)), σ₀) ≤ r^{β−2}} per radius, against
/// r^{−ξ} and against the proof's bound.
pub fn ilse_experiment(
    model: &Model,
    v: VertexId,
    params: &IlseParams,
    n_samples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    require_samples(n_samples)?;
    params.validate()?;
    let g = &model.graph;
    for &r in &params.radii {
        g.check_ball_inside(v, r)?;
    }
    let sigma0 = match params.sigma0 {
        Some(s) => s,
        None => model.spectral_floor()?,
    };
    let rows = run_samples(n_samples, seed, |k, s| {
        let omega = model.sample(s);
        params
            .radii
            .iter()
            .map(|&r| {
                let op = model.ball_operator(&omega, v, r)?;
                let dist = distance_to_spectrum(&op, sigma0);
                let small = dist <= r.powf(params.beta - 2.0);
                Ok(vec![r, k as f64, dist, small as u8 as f64])
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let rows: Vec<Vec<f64>> = rows.into_iter().flatten().collect();
    let (u, c_minus) = (g.u(), model.spec.c_minus());
    let mut rep = EstimateReport::new("ilse", n_samples, seed);
    rep.x_name = "r".into();
    let mut ok = true;
    for &r in &params.radii {
        let hits = rows
            .iter()
            .filter(|row| row[0] == r && row[3] == 1.0)
            .count();
        let (p, se) = proportion(hits, n_samples);
        let bound = r.powf(-params.xi);
        let lower = params.proof_bound(r, u, c_minus);
        let n_edges = g.ball_edge_set(v, r)?.len() as f64;
        let h = r.powf(params.beta - 2.0);
        let exact = 1.0
            - (1.0
                - model
                    .spec
                    .mass(model.spec.q_minus, model.spec.q_minus + h / c_minus))
            .powf(n_edges);
        let pass = p - 2.0 * se <= bound;
        let analytic_ok = p - 2.0 * se <= 1.0 - lower;
        ok &= pass && analytic_ok;
        let factor = params.proof_factor(r, u, c_minus);
        if factor > 1.0 && !rep.has_flag("below_proof_radius") {
            rep.flags.push("below_proof_radius".into());
        }
        let mut extra = BTreeMap::new();
        extra.insert("h".into(), h);
        extra.insert("proof_lower_bound".into(), lower);
        extra.insert("proof_upper_bound_bad".into(), 1.0 - lower);
        extra.insert("exact_upper_bound_bad".into(), exact);
        extra.insert("proof_factor".into(), factor);
        extra.insert("analytic_ok".into(), analytic_ok as u8 as f64);
        rep.points.push(ReportPoint {
            x: r,
            estimate: p,
            se,
            bound,
            verdict: pass.into(),
            extra,
        });
    }
    rep.fitted.insert("sigma0".into(), sigma0);
    rep.verdict = Verdict::from(ok);
    let last = rep.points.last().expect("radii are nonempty");
    rep.p_hat = Some(last.estimate);
    rep.se = Some(last.se);
    rep.bound = Some(last.bound);
    rep.samples = SampleTable {
        rows,
        ..SampleTable::new(&["r", "sample", "dist_to_sigma0", "small"])
    };
    Ok(rep)
}
