use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Induction parameters of the multiscale analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsaParams {
    /// growth degree of the graph
    pub d: f64,
    /// disorder exponent, μ([q₋, q₋ + h]) ≤ h^τ
    pub tau: f64,
    /// weak Wegner exponent
    pub q: f64,
    /// probability exponent of G(I, r, n, ξ)
    pub xi: f64,
    /// scale step R = r^α
    pub alpha: f64,
    /// resonance exponent
    pub theta: f64,
    /// decay exponent of good balls
    pub n: f64,
    /// initial-length-scale exponent, h = r^{β−2}
    pub beta: f64,
}

impl MsaParams {
    pub fn q_interval(d: f64) -> (f64, f64) {
        (7.0 * d - 6.0, 7.0 * d)
    }

    pub fn xi_interval(d: f64, tau: f64, q: f64) -> (f64, f64) {
        (
            2.0 * d - 2.0,
            (2.0 * tau - d).min((q - 3.0 * d + 2.0) / 2.0),
        )
    }

    pub fn alpha_interval(d: f64, q: f64, xi: f64) -> (f64, f64) {
        (
            1.0,
            ((2.0 + 2.0 * xi) / (2.0 * d + xi)).min((2.0 + q) / (3.0 * d + 2.0 * xi)),
        )
    }

    /// n must exceed this
    pub fn n_lower(d: f64, alpha: f64) -> f64 {
        9.0 * alpha * d + d - 2.0
    }

    pub fn theta_interval(d: f64, q: f64, alpha: f64, n: f64) -> (f64, f64) {
        ((q + d) / n, (n + 2.0 - d - alpha * d) / (alpha * n))
    }

    pub fn beta_upper(d: f64, tau: f64, xi: f64) -> f64 {
        (2.0 * tau - d - xi) / tau
    }

    /// The same tuple with another n and θ moved to the middle of its new interval.
    pub fn with_n(mut self, n: f64) -> Self {
        let (lo, hi) = Self::theta_interval(self.d, self.q, self.alpha, n);
        self.n = n;
        self.theta = 0.5 * (lo + hi);
        self
    }

    /// δ₋ exponent −n − 2 + d + αθn + αd.
    pub fn delta_minus_exponent(&self) -> f64 {
        -self.n - 2.0 + self.d + self.alpha * self.theta * self.n + self.alpha * self.d
    }
}

/// One executable relation and whether it holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub id: String,
    pub statement: String,
    /// the relation written as `slack > 0`
    pub slack: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub checks: Vec<RelationCheck>,
    pub q_interval: (f64, f64),
    pub xi_interval: (f64, f64),
    pub alpha_interval: (f64, f64),
    pub n_lower: f64,
    /// 19d + 16: every n above it is admissible
    pub n_sufficient: f64,
    pub theta_interval: (f64, f64),
    pub beta_upper: f64,
}

impl Certificate {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn check(&self, id: &str) -> Option<&RelationCheck> {
        self.checks.iter().find(|c| c.id == id)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feasible {
    pub params: MsaParams,
    pub certificate: Certificate,
}

fn rel(id: &str, statement: String, slack: f64) -> RelationCheck {
    RelationCheck {
        id: id.into(),
        statement,
        slack,
        holds: slack > 0.0,
    }
}

fn inside(id: &str, name: &str, x: f64, (lo, hi): (f64, f64)) -> RelationCheck {
    rel(
        id,
        format!("{name} = {x} ∈ ({lo}, {hi})"),
        (x - lo).min(hi - x),
    )
}

/// Every relation, in the order they are reported: the defining intervals
/// first, then the eleven interlocking relations, then the two closing estimates on n and α.
pub fn relations(p: &MsaParams) -> Vec<RelationCheck> {
    let MsaParams {
        d,
        tau,
        q,
        xi,
        alpha,
        theta,
        n,
        beta,
    } = *p;
    let a_int = MsaParams::alpha_interval(d, q, xi);
    let t_int = MsaParams::theta_interval(d, q, alpha, n);
    let a1 = (2.0 + 2.0 * xi) / (2.0 * d + xi);
    let a2 = (2.0 + q) / (3.0 * d + 2.0 * xi);
    let n_low = MsaParams::n_lower(d, alpha);
    vec![
        rel(
            "tau",
            format!("τ = {tau} > 3d/2 − 1 = {}", 1.5 * d - 1.0),
            tau - (1.5 * d - 1.0),
        ),
        inside("q", "q", q, MsaParams::q_interval(d)),
        inside("xi", "ξ", xi, MsaParams::xi_interval(d, tau, q)),
        inside("alpha", "α", alpha, a_int),
        rel("n", format!("n = {n} > 9αd + d − 2 = {n_low}"), n - n_low),
        inside("theta", "θ", theta, t_int),
        inside("beta", "β", beta, (0.0, MsaParams::beta_upper(d, tau, xi))),
        rel("tau_above_half_d", format!("τ > d/2 = {}", d / 2.0), tau - d / 2.0),
        inside("xi_below_2tau_minus_d", "ξ", xi, (0.0, 2.0 * tau - d)),
        rel(
            "q_below_theta_n",
            format!("q = {q} < θn − d = {}", theta * n - d),
            theta * n - d - q,
        ),
        rel("alpha_below_a1", format!("α < (2+2ξ)/(2d+ξ) = {a1}"), a1 - alpha),
        rel("alpha_below_a2", format!("α < (2+q)/(3d+2ξ) = {a2}"), a2 - alpha),
        rel(
            "theta_upper",
            format!("θ < (n+2−d−αd)/(αn) = {}", t_int.1),
            t_int.1 - theta,
        ),
        rel(
            "xi_vs_alpha_d",
            "αd − 1 − 2ξ < 0".into(),
            1.0 + 2.0 * xi - alpha * d,
        ),
        rel(
            "n_over_alpha",
            "d/α + (d+2)/2 − n/α < 0".into(),
            n / alpha - d / alpha - (d + 2.0) / 2.0,
        ),
        rel(
            "n_over_alpha_margin",
            "n/α − d/α − (d+2)/2 > (d+1)/2".into(),
            n / alpha - d / alpha - (d + 2.0) / 2.0 - (d + 1.0) / 2.0,
        ),
        rel(
            "a1_a2_above_one",
            "(2+2ξ)/(2d+ξ) > 1 and (2+q)/(3d+2ξ) > 1".into(),
            (a1 - 1.0).min(a2 - 1.0),
        ),
        rel(
            "theta_interval_nonempty",
            format!("(n+2−d−αd)/(αn) > (q+d)/n = {}", t_int.0),
            t_int.1 - t_int.0,
        ),
        rel(
            "n_sufficient",
            format!("9αd + d − 2 = {n_low} < 19d + 16 = {}", 19.0 * d + 16.0),
            19.0 * d + 16.0 - n_low,
        ),
        rel("alpha_max", format!("α = {alpha} < 3"), 3.0 - alpha),
    ]
}

fn certificate(p: &MsaParams) -> Certificate {
    Certificate {
        checks: relations(p),
        q_interval: MsaParams::q_interval(p.d),
        xi_interval: MsaParams::xi_interval(p.d, p.tau, p.q),
        alpha_interval: MsaParams::alpha_interval(p.d, p.q, p.xi),
        n_lower: MsaParams::n_lower(p.d, p.alpha),
        n_sufficient: 19.0 * p.d + 16.0,
        theta_interval: MsaParams::theta_interval(p.d, p.q, p.alpha, p.n),
        beta_upper: MsaParams::beta_upper(p.d, p.tau, p.xi),
    }
}

fn mid((lo, hi): (f64, f64)) -> f64 {
    0.5 * (lo + hi)
}

/// Interval midpoints in the order q → ξ → α → n → θ → β, with n the
/// smallest integer strictly above 9αd + d − 2, plus one.
pub fn construct_params(d: f64, tau: f64) -> MsaParams {
    let q = mid(MsaParams::q_interval(d));
    let xi = mid(MsaParams::xi_interval(d, tau, q));
    let alpha = mid(MsaParams::alpha_interval(d, q, xi));
    let n = MsaParams::n_lower(d, alpha).floor() + 2.0;
    let theta = mid(MsaParams::theta_interval(d, q, alpha, n));
    let beta = 0.5 * MsaParams::beta_upper(d, tau, xi);
    MsaParams {
        d,
        tau,
        q,
        xi,
        alpha,
        theta,
        n,
        beta,
    }
}

/// Checks a candidate tuple (naming the first violated relation) or, with no
/// candidate, constructs one; either way returns the full certificate.
pub fn validate_params(d: f64, tau: f64, candidate: Option<&MsaParams>) -> Result<Feasible> {
    if !(d >= 1.0) {
        return Err(Error::Invalid(format!(
            "growth degree d = {d} must be at least 1"
        )));
    }
    if !(tau > 1.5 * d - 1.0) {
        return Err(Error::Relation(format!(
            "disorder assumption needs τ > 3d/2 − 1 = {}, got τ = {tau}",
            1.5 * d - 1.0
        )));
    }
    let params = match candidate {
        Some(c) => {
            if c.d != d || c.tau != tau {
                return Err(Error::Invalid(format!(
                    "candidate has (d, τ) = ({}, {}), expected ({d}, {tau})",
                    c.d, c.tau
                )));
            }
            *c
        }
        None => construct_params(d, tau),
    };
    let cert = certificate(&params);
    if let Some(bad) = cert.checks.iter().find(|c| !c.holds) {
        return Err(Error::Relation(format!("{}: {}", bad.id, bad.statement)));
    }
    Ok(Feasible {
        params,
        certificate: cert,
    })
}
