use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::{EdgeId, MetricGraph};

/// Coupling density on [q₋, q₊].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    Uniform,
    /// Rescaled to [q₋, q₊] from [1, 2]: (2d)(x−1)^{2d−1} up to 1 + 2^{−1/(2d)},
    /// constant afterwards. Puts mass h^{2d} on [q₋, q₋ + h].
    PowerFlat {
        d: f64,
    },
    /// Piecewise constant on equal bins (weights need not be normalised).
    Histogram {
        weights: Vec<f64>,
    },
}

/// Single-site profile ν_e, either constant or a step function on equal cells of I_e.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Profile {
    Constant(f64),
    Steps(Vec<f64>),
}

impl Profile {
    pub fn cells(&self) -> usize {
        match self {
            Profile::Constant(_) => 1,
            Profile::Steps(v) => v.len(),
        }
    }

    /// Value at the relative position s ∈ (0, 1).
    pub fn at(&self, s: f64) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Steps(v) => {
                let k = ((s * v.len() as f64).floor() as usize).min(v.len() - 1);
                v[k]
            }
        }
    }

    fn range(&self) -> (f64, f64) {
        match self {
            Profile::Constant(c) => (*c, *c),
            Profile::Steps(v) => v
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                    (a.min(x), b.max(x))
                }),
        }
    }
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Constant(1.0)
    }
}

fn default_profile() -> Profile {
    Profile::default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomPotentialSpec {
    pub q_minus: f64,
    pub q_plus: f64,
    pub density: Density,
    #[serde(default = "default_profile")]
    pub profile: Profile,
    /// per-edge overrides of the profile
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub profiles: BTreeMap<EdgeId, Profile>,
    /// disorder exponent, if claimed
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

impl RandomPotentialSpec {
    pub fn uniform(q_minus: f64, q_plus: f64) -> Self {
        RandomPotentialSpec {
            q_minus,
            q_plus,
            density: Density::Uniform,
            profile: Profile::default(),
            profiles: BTreeMap::new(),
            tau: None,
        }
    }

    /// The power-flat coupling law on [1, 2] with disorder exponent τ = 2d.
    pub fn power_flat(d: f64) -> Self {
        RandomPotentialSpec {
            q_minus: 1.0,
            q_plus: 2.0,
            density: Density::PowerFlat { d },
            profile: Profile::default(),
            profiles: BTreeMap::new(),
            tau: Some(2.0 * d),
        }
    }

    pub fn with_profile(mut self, profile: Profile) -> Self {
        self.profile = profile;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_minus.is_finite() && self.q_plus.is_finite() && self.q_minus < self.q_plus) {
            return invalid(format!(
                "coupling support [{}, {}] must be a proper bounded interval",
                self.q_minus, self.q_plus
            ));
        }
        match &self.density {
            Density::Uniform => {}
            Density::PowerFlat { d } => {
                if !(*d > 0.0) {
                    return invalid("power-flat density needs d > 0");
                }
            }
            Density::Histogram { weights } => {
                if weights.is_empty()
                    || weights.iter().any(|w| !(*w >= 0.0))
                    || weights.iter().sum::<f64>() <= 0.0
                {
                    return invalid("histogram weights must be nonnegative with positive sum");
                }
            }
        }
        for p in std::iter::once(&self.profile).chain(self.profiles.values()) {
            if p.cells() == 0 {
                return invalid("empty profile");
            }
            let (lo, hi) = p.range();
            if !(lo > 0.0 && hi.is_finite()) {
                return invalid("profiles must be positive and bounded");
            }
        }
        if let Some(t) = self.tau {
            if !(t > 0.0) {
                return invalid("tau must be positive");
            }
        }
        Ok(())
    }

    pub fn profile_for(&self, e: EdgeId) -> &Profile {
        self.profiles.get(&e).unwrap_or(&self.profile)
    }

    /// (c₋, c₊) over the default profile and all overrides.
    pub fn profile_bounds(&self) -> (f64, f64) {
        std::iter::once(&self.profile)
            .chain(self.profiles.values())
            .map(Profile::range)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (lo, hi)| {
                (a.min(lo), b.max(hi))
            })
    }

    pub fn c_minus(&self) -> f64 {
        self.profile_bounds().0
    }

    pub fn c_plus(&self) -> f64 {
        self.profile_bounds().1
    }

    fn width(&self) -> f64 {
        self.q_plus - self.q_minus
    }

    /// Density on the reference interval [0, 1].
    fn ref_pdf(&self, y: f64) -> f64 {
        if !(0.0..=1.0).contains(&y) {
            return 0.0;
        }
        match &self.density {
            Density::Uniform => 1.0,
            Density::PowerFlat { d } => {
                let a = 2f64.powf(-1.0 / (2.0 * d));
                if y <= a {
                    2.0 * d * y.powf(2.0 * d - 1.0)
                } else {
                    0.5 / (1.0 - a)
                }
            }
            Density::Histogram { weights } => {
                let total: f64 = weights.iter().sum();
                let k = ((y * weights.len() as f64) as usize).min(weights.len() - 1);
                weights[k] / total * weights.len() as f64
            }
        }
    }

    fn ref_cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return 1.0;
        }
        match &self.density {
            Density::Uniform => y,
            Density::PowerFlat { d } => {
                let a = 2f64.powf(-1.0 / (2.0 * d));
                if y <= a {
                    y.powf(2.0 * d)
                } else {
                    0.5 + 0.5 * (y - a) / (1.0 - a)
                }
            }
            Density::Histogram { weights } => {
                let total: f64 = weights.iter().sum();
                let n = weights.len() as f64;
                let pos = y * n;
                let k = (pos as usize).min(weights.len() - 1);
                (weights[..k].iter().sum::<f64>() + weights[k] * (pos - k as f64)) / total
            }
        }
    }

    fn ref_quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match &self.density {
            Density::Uniform => p,
            Density::PowerFlat { d } => {
                let a = 2f64.powf(-1.0 / (2.0 * d));
                if p <= 0.5 {
                    p.powf(1.0 / (2.0 * d))
                } else {
                    a + (p - 0.5) * 2.0 * (1.0 - a)
                }
            }
            Density::Histogram { weights } => {
                let total: f64 = weights.iter().sum();
                let n = weights.len() as f64;
                let mut acc = 0.0;
                for (k, &w) in weights.iter().enumerate() {
                    let mass = w / total;
                    if mass > 0.0 && acc + mass >= p {
                        return (k as f64 + (p - acc) / mass) / n;
                    }
                    acc += mass;
                }
                1.0
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ref_pdf((x - self.q_minus) / self.width()) / self.width()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.ref_cdf((x - self.q_minus) / self.width())
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.q_minus + self.width() * self.ref_quantile(p)
    }

    /// c_ρ = ‖ρ_μ‖_∞.
    pub fn c_rho(&self) -> f64 {
        let sup = match &self.density {
            Density::Uniform => 1.0,
            Density::PowerFlat { d } => {
                let a = 2f64.powf(-1.0 / (2.0 * d));
                let left = if *d >= 0.5 {
                    2.0 * d * a.powf(2.0 * d - 1.0)
                } else {
                    f64::INFINITY
                };
                left.max(0.5 / (1.0 - a))
            }
            Density::Histogram { weights } => {
                let total: f64 = weights.iter().sum();
                weights.iter().fold(0.0f64, |m, &w| m.max(w)) / total * weights.len() as f64
            }
        };
        sup / self.width()
    }

    /// μ([λ − ε, λ + ε]).
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        (self.cdf(hi) - self.cdf(lo)).max(0.0)
    }

    /// Modulus of continuity s(μ, ε) = sup_λ μ([λ − ε, λ + ε]), by a grid scan
    /// refined with golden-section steps around the best grid point.
    pub fn modulus_of_continuity(&self, eps: f64) -> f64 {
        if eps <= 0.0 {
            return 0.0;
        }
        if 2.0 * eps >= self.width() {
            return 1.0;
        }
        let f = |c: f64| self.mass(c - eps, c + eps);
        let (a, b) = (self.q_minus - eps, self.q_plus + eps);
        let n = 2000;
        let step = (b - a) / n as f64;
        let (mut best_c, mut best) = (a, f(a));
        for k in 1..=n {
            let c = a + step * k as f64;
            let v = f(c);
            if v > best {
                best = v;
                best_c = c;
            }
        }
        let (mut lo, mut hi) = (best_c - step, best_c + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c1 = hi - g * (hi - lo);
            let c2 = lo + g * (hi - lo);
            if f(c1) >= f(c2) {
                hi = c2;
            } else {
                lo = c1;
            }
        }
        best.max(f(0.5 * (lo + hi)))
    }

    /// C_pot = max{|q₋|, |q₊|}·c₊.
    pub fn potential_norm_bound(&self) -> f64 {
        self.q_minus.abs().max(self.q_plus.abs()) * self.c_plus()
    }

    /// Draws ω_e for every edge of `g`: one ChaCha stream per edge id, so the
    /// value of an edge does not depend on the sampling order.
    pub fn sample(&self, g: &MetricGraph, seed: u64) -> CouplingAssignment {
        self.sample_n(g.n_edges(), seed)
    }

    pub fn sample_n(&self, n_edges: usize, seed: u64) -> CouplingAssignment {
        let omega = (0..n_edges)
            .map(|e| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(e as u64);
                self.quantile(rng.random::<f64>())
            })
            .collect();
        CouplingAssignment {
            omega,
            seed: Some(seed),
        }
    }
}

/// Per-sample seed derived from a master seed (splitmix64 finaliser).
pub fn sample_seed(master: u64, k: u64) -> u64 {
    let mut z = master ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The couplings ω_e, indexed by edge id of the ambient graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingAssignment {
    pub omega: Vec<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl CouplingAssignment {
    pub fn constant(n_edges: usize, value: f64) -> Self {
        CouplingAssignment {
            omega: vec![value; n_edges],
            seed: None,
        }
    }

    pub fn get(&self, e: EdgeId) -> f64 {
        self.omega[e]
    }

    pub fn set(&mut self, e: EdgeId, value: f64) {
        self.omega[e] = value;
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Grows the assignment for edges appended to the graph.
    pub fn extend(&mut self, n_edges: usize, value: f64) {
        self.omega.resize(n_edges, value);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_mean() {
        let s = RandomPotentialSpec::uniform(1.0, 2.0);
        let w = s.sample_n(10_000, 7);
        assert!(w.omega.iter().all(|&x| (1.0..=2.0).contains(&x)));
        let mean = w.omega.iter().sum::<f64>() / 1e4;
        assert!((mean - 1.5).abs() < 0.02);
        let mut sorted = w.omega.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        assert_eq!(sorted.len(), 10_000);
    }

    #[test]
    fn sampling_is_order_free() {
        let s = RandomPotentialSpec::uniform(0.0, 1.0);
        let a = s.sample_n(50, 3);
        let b = s.sample_n(10, 3);
        assert_eq!(&a.omega[..10], &b.omega[..]);
        assert_ne!(s.sample_n(10, 4).omega, b.omega);
    }

    #[test]
    fn power_flat_cdf_and_quantile() {
        let s = RandomPotentialSpec::power_flat(1.0);
        let a = 2f64.powf(-0.5);
        assert!((s.cdf(1.0 + a) - 0.5).abs() < 1e-15);
        assert!((s.cdf(1.3) - 0.09).abs() < 1e-15);
        for p in [0.01, 0.3, 0.5, 0.77, 0.99] {
            assert!((s.cdf(s.quantile(p)) - p).abs() < 1e-12);
        }
        assert!((s.c_rho() - 1.0 / (2.0 - 2f64.sqrt())).abs() < 1e-12);
        // disorder: μ([q₋, q₋ + h]) = h^2
        assert!((s.mass(1.0, 1.1) - 0.01).abs() < 1e-14);
        // numerical integral of the density is 1
        let n = 200_000;
        let integral: f64 = (0..n)
            .map(|k| s.pdf(1.0 + (k as f64 + 0.5) / n as f64))
            .sum::<f64>()
            / n as f64;
        assert!((integral - 1.0).abs() < 1e-6);
    }

    #[test]
    fn histogram_roundtrip() {
        let s = RandomPotentialSpec {
            density: Density::Histogram {
                weights: vec![1.0, 0.0, 3.0],
            },
            ..RandomPotentialSpec::uniform(0.0, 3.0)
        };
        s.validate().unwrap();
        assert!((s.cdf(1.0) - 0.25).abs() < 1e-15);
        assert!((s.cdf(2.5) - 0.625).abs() < 1e-15);
        assert!((s.quantile(0.625) - 2.5).abs() < 1e-12);
        assert!((s.c_rho() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn modulus_uniform_and_bound() {
        let s = RandomPotentialSpec::uniform(1.0, 2.0);
        for eps in [1e-3, 1e-2, 0.1] {
            let m = s.modulus_of_continuity(eps);
            assert!((m - 2.0 * eps).abs() < 1e-9);
            assert!(m <= 2.0 * eps * s.c_rho() + 1e-12);
        }
        let p = RandomPotentialSpec::power_flat(1.0);
        for eps in [1e-3, 1e-2, 0.1, 0.4] {
            assert!(p.modulus_of_continuity(eps) <= 2.0 * eps * p.c_rho() + 1e-12);
        }
    }

    #[test]
    fn norm_bound_formula() {
        assert_eq!(
            RandomPotentialSpec::uniform(1.0, 2.0).potential_norm_bound(),
            2.0
        );
        let s =
            RandomPotentialSpec::uniform(-1.0, 0.5).with_profile(Profile::Steps(vec![1.0, 3.0]));
        assert_eq!(s.potential_norm_bound(), 3.0);
        assert_eq!(s.profile_bounds(), (1.0, 3.0));
    }

    #[test]
    fn seeds_spread() {
        let a: Vec<u64> = (0..100).map(|k| sample_seed(42, k)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_ne!(sample_seed(1, 0), sample_seed(2, 0));
    }

    #[test]
    fn spec_json_roundtrip() {
        let s = RandomPotentialSpec::power_flat(1.0).with_profile(Profile::Steps(vec![1.0, 2.0]));
        let js = serde_json::to_string(&s).unwrap();
        let back: RandomPotentialSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(s, back);
        let t: RandomPotentialSpec =
            serde_json::from_str(r#"{"q_minus":0,"q_plus":1,"density":{"kind":"uniform"}}"#)
                .unwrap();
        assert_eq!(t.profile, Profile::Constant(1.0));
    }
}
