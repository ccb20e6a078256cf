use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eigen::distance_to_spectrum;
use crate::error::{Error, Result};
use crate::graph::EdgeSet;
use crate::linalg::TridiagCholesky;
use crate::operator::{AssembledOperator, EdgeFunction, ShiftedFactor};

/// λ closer than this to the spectrum is treated as resonant.
pub const RESONANCE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockNormOptions {
    /// relative tolerance of the power iteration
    pub tol: f64,
    pub max_iter: usize,
    /// use an explicit matrix when the B side has at most this many nodal values
    pub dense_limit: usize,
}

impl Default for BlockNormOptions {
    fn default() -> Self {
        BlockNormOptions {
            tol: 1e-6,
            max_iter: 500,
            dense_limit: 128,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockNorm {
    pub value: f64,
    pub iterations: usize,
    pub dense: bool,
}

/// Errors with `Resonance` if λ is within `RESONANCE_TOL` of the spectrum.
pub fn check_resonance(op: &AssembledOperator, lambda: f64) -> Result<()> {
    let lo = op.count_below(lambda - RESONANCE_TOL);
    let hi = op.count_below(lambda + RESONANCE_TOL);
    if hi > lo {
        return Err(Error::Resonance {
            lambda,
            distance: distance_to_spectrum(op, lambda),
        });
    }
    Ok(())
}

/// (H − λ)^{-1} on L² functions, with the mass Cholesky factors of every edge
/// so that block norms can be taken in orthonormal coordinates.
pub struct Resolvent<'a> {
    op: &'a AssembledOperator,
    fac: ShiftedFactor<'a>,
    chol: Vec<TridiagCholesky>,
}

fn mass_cholesky(m: usize, he: f64) -> TridiagCholesky {
    let mut d = vec![2.0 * he / 3.0; m + 1];
    d[0] = he / 3.0;
    d[m] = he / 3.0;
    TridiagCholesky::new(&d, &vec![he / 6.0; m]).expect("P1 mass matrix is positive definite")
}

impl<'a> Resolvent<'a> {
    pub fn new(op: &'a AssembledOperator, lambda: f64) -> Result<Self> {
        check_resonance(op, lambda)?;
        let fac = op.factorize(lambda)?;
        let chol = op
            .edge_blocks()
            .iter()
            .map(|e| mass_cholesky(e.m, e.he))
            .collect();
        Ok(Resolvent { op, fac, chol })
    }

    pub fn lambda(&self) -> f64 {
        self.fac.lambda()
    }

    /// u = (H − λ)^{-1} f.
    pub fn apply(&self, f: &EdgeFunction) -> EdgeFunction {
        let x = self.fac.solve(&self.op.load(f));
        self.op.expand(&x)
    }

    fn local(&self, set: &EdgeSet) -> Result<Vec<usize>> {
        set.iter()
            .map(|e| {
                self.op.local_index(e).ok_or_else(|| {
                    Error::Invalid(format!("edge {e} is not part of the operator's subgraph"))
                })
            })
            .collect()
    }

    /// L_to^T G_{to,from} L_from φ in orthonormal edge coordinates.
    fn map(&self, from: &[usize], to: &[usize], phi: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut nodal = self.op.zero_function();
        for (k, &li) in from.iter().enumerate() {
            self.chol[li].mul_l(&phi[k], &mut nodal.values[li]);
        }
        let x = self.fac.solve(&self.op.restrict(&nodal));
        let u = self.op.expand(&x);
        to.iter()
            .map(|&li| {
                let mut y = vec![0.0; u.values[li].len()];
                self.chol[li].mul_lt(&u.values[li], &mut y);
                y
            })
            .collect()
    }

    /// ‖1_A (H − λ)^{-1} 1_B‖ as an operator on L².
    pub fn block_norm(
        &self,
        a: &EdgeSet,
        b: &EdgeSet,
        opts: &BlockNormOptions,
    ) -> Result<BlockNorm> {
        let (ai, bi) = (self.local(a)?, self.local(b)?);
        if ai.is_empty() || bi.is_empty() {
            return Ok(BlockNorm {
                value: 0.0,
                iterations: 0,
                dense: true,
            });
        }
        let sizes = |idx: &[usize]| {
            idx.iter()
                .map(|&k| self.op.edge_blocks()[k].m + 1)
                .collect::<Vec<_>>()
        };
        let (sa, sb) = (sizes(&ai), sizes(&bi));
        let nb: usize = sb.iter().sum();
        if nb <= opts.dense_limit {
            let na: usize = sa.iter().sum();
            let mut mat = DMatrix::zeros(na, nb);
            let mut col = 0;
            for (k, &len) in sb.iter().enumerate() {
                for i in 0..len {
                    let mut phi: Vec<Vec<f64>> = sb.iter().map(|&n| vec![0.0; n]).collect();
                    phi[k][i] = 1.0;
                    let out = self.map(&bi, &ai, &phi);
                    for (row, v) in out.iter().flatten().enumerate() {
                        mat[(row, col)] = *v;
                    }
                    col += 1;
                }
            }
            let value = mat.singular_values().iter().copied().fold(0.0, f64::max);
            return Ok(BlockNorm {
                value,
                iterations: 0,
                dense: true,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0xb10c);
        let mut v: Vec<Vec<f64>> = sb
            .iter()
            .map(|&n| (0..n).map(|_| rng.random::<f64>() + 0.5).collect())
            .collect();
        normalize(&mut v);
        let mut prev = 0.0;
        for it in 1..=opts.max_iter {
            let w = self.map(&bi, &ai, &v);
            let sigma = norm(&w);
            if sigma == 0.0 {
                return Ok(BlockNorm {
                    value: 0.0,
                    iterations: it,
                    dense: false,
                });
            }
            if it > 1 && (sigma - prev).abs() <= opts.tol * sigma {
                return Ok(BlockNorm {
                    value: sigma,
                    iterations: it,
                    dense: false,
                });
            }
            prev = sigma;
            v = self.map(&ai, &bi, &w);
            normalize(&mut v);
        }
        Err(Error::NoConvergence(opts.max_iter))
    }
}

fn norm(v: &[Vec<f64>]) -> f64 {
    v.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Vec<f64>]) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().flatten().for_each(|x| *x /= n);
    }
}

/// ‖1_A (H − λ)^{-1} 1_B‖ with default options.
pub fn resolvent_block_norm(
    op: &AssembledOperator,
    lambda: f64,
    a: &EdgeSet,
    b: &EdgeSet,
) -> Result<f64> {
    Ok(Resolvent::new(op, lambda)?
        .block_norm(a, b, &BlockNormOptions::default())?
        .value)
}
