use serde::{Deserialize, Serialize};

use super::params::{validate_params, MsaParams};
use crate::covering::{container_radii, R_GEOM};
use crate::error::{Error, Result};

/// r_k = r0^(α^k), k = 0..=K, each step computed as r_{k+1} = r_k^α.
pub fn scale_schedule(r0: f64, alpha: f64, k: usize) -> Result<Vec<f64>> {
    if !(alpha > 1.0) {
        return Err(Error::Invalid(format!(
            "scale exponent α = {alpha} must exceed 1"
        )));
    }
    if !(r0 > 1.0) {
        return Err(Error::Invalid(format!(
            "initial radius r0 = {r0} must exceed 1"
        )));
    }
    let mut out = Vec::with_capacity(k + 1);
    out.push(r0);
    for i in 0..k {
        out.push(out[i].powf(alpha));
    }
    Ok(out)
}

/// Constants fitted by the estimate experiments (all 1 for pure arithmetic).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedConstants {
    pub c_gru: f64,
    pub c_cta: f64,
    pub c_p: f64,
}

impl Default for FittedConstants {
    fn default() -> Self {
        FittedConstants {
            c_gru: 1.0,
            c_cta: 1.0,
            c_p: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prefactors {
    pub r: f64,
    /// R = r^α
    pub big_r: f64,
    pub r_i: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub ln_delta_plus: f64,
    pub ln_delta_minus: f64,
    pub k_plus_lower: f64,
    /// −n − 2 + d + αθn + αd
    pub delta_minus_exponent: f64,
    /// θ sits on its upper bound, so the exponent above is 0
    pub exponent_boundary: bool,
    pub outside_proof_regime: bool,
}

/// Lower bound R/(2r) − 17 on the number of good steps in the resolvent chain.
pub fn k_plus_lower(big_r: f64, r: f64) -> f64 {
    big_r / (2.0 * r) - 17.0
}

/// ln δ₊, δ₊ = C_GRU c_P (3/2)^d r^{−n−1+d}.
pub fn ln_delta_plus(p: &MsaParams, c: &FittedConstants, r: f64) -> f64 {
    (c.c_gru * c.c_p).ln() + p.d * 1.5f64.ln() + (-p.n - 1.0 + p.d) * r.ln()
}

/// ln δ₋, δ₋ = 20 (3/2)^d C_CTA (C_GRU c_P)² (r_i + 13r/30 + U)^d r^{−n−2+d} r_i^{θn}.
pub fn ln_delta_minus(p: &MsaParams, c: &FittedConstants, r: f64, r_i: f64, big_u: f64) -> f64 {
    20f64.ln()
        + p.d * 1.5f64.ln()
        + c.c_cta.ln()
        + 2.0 * (c.c_gru * c.c_p).ln()
        + p.d * (r_i + 13.0 * r / 30.0 + big_u).ln()
        + (-p.n - 2.0 + p.d) * r.ln()
        + p.theta * p.n * r_i.ln()
}

// both underflow to 0 long before the logs lose anything
pub fn delta_plus(p: &MsaParams, c: &FittedConstants, r: f64) -> f64 {
    ln_delta_plus(p, c, r).exp()
}

pub fn delta_minus(p: &MsaParams, c: &FittedConstants, r: f64, r_i: f64, big_u: f64) -> f64 {
    ln_delta_minus(p, c, r, r_i, big_u).exp()
}

/// δ₊, δ₋ and the k₊ bound at scale r for the chain ending in a ball of
/// radius r_i ∈ ℛ ∪ {R}. θ may sit on its upper bound, which is flagged.
pub fn iteration_prefactors(
    p: &MsaParams,
    r: f64,
    consts: &FittedConstants,
    r_i: f64,
    big_u: f64,
) -> Result<Prefactors> {
    let (_, t_hi) = MsaParams::theta_interval(p.d, p.q, p.alpha, p.n);
    let on_boundary = (p.theta - t_hi).abs() <= 1e-12 * t_hi.abs().max(1.0);
    // θ is checked separately so the closed upper end is allowed
    let mut probe = *p;
    if on_boundary {
        probe = probe.with_n(p.n);
    }
    validate_params(p.d, p.tau, Some(&probe))?;
    if !(r > 1.0 && big_u > 0.0) {
        return Err(Error::Invalid(format!(
            "need r > 1 and U > 0, got r = {r}, U = {big_u}"
        )));
    }
    if consts.c_gru <= 0.0 || consts.c_cta <= 0.0 || consts.c_p <= 0.0 {
        return Err(Error::Invalid("fitted constants must be positive".into()));
    }
    let big_r = r.powf(p.alpha);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b;
    if !close(r_i, big_r) && !container_radii(r, big_u).iter().any(|&c| close(r_i, c)) {
        return Err(Error::Invalid(format!(
            "r_i = {r_i} is neither R = {big_r} nor a container radius"
        )));
    }
    let e = p.delta_minus_exponent();
    Ok(Prefactors {
        r,
        big_r,
        r_i,
        delta_plus: delta_plus(p, consts, r),
        delta_minus: delta_minus(p, consts, r, r_i, big_u),
        ln_delta_plus: ln_delta_plus(p, consts, r),
        ln_delta_minus: ln_delta_minus(p, consts, r, r_i, big_u),
        k_plus_lower: k_plus_lower(big_r, r),
        delta_minus_exponent: e,
        exponent_boundary: on_boundary || e.abs() <= 1e-9,
        outside_proof_regime: r <= R_GEOM * big_u,
    })
}
