use crate::error::{Error, Result};

/// Number of negative eigenvalues of the symmetric tridiagonal matrix with
/// diagonal `d` and off-diagonal `e` (Sturm count through the LDL^T pivots).
pub fn sturm_negatives(d: &[f64], e: &[f64]) -> usize {
    let pivmin = pivot_floor(d, e);
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        q = if i == 0 {
            d[0]
        } else {
            d[i] - e[i - 1] * e[i - 1] / q
        };
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn pivot_floor(d: &[f64], e: &[f64]) -> f64 {
    let scale = d.iter().chain(e).fold(1.0f64, |m, x| m.max(x.abs()));
    f64::MIN_POSITIVE.sqrt() * scale
}

/// Corner entries of T^{-1} for a symmetric tridiagonal T:
/// ((T^-1)_{11}, (T^-1)_{1n}, (T^-1)_{nn}), plus the Sturm count of T.
/// Pivots are kept away from zero the same way as in `sturm_negatives`.
pub fn inverse_corners(d: &[f64], e: &[f64]) -> (f64, f64, f64, usize) {
    let n = d.len();
    let pivmin = pivot_floor(d, e);
    let guard = |q: f64| if q.abs() < pivmin { -pivmin } else { q };
    // forward: q_i = det(T_{1..i}) / det(T_{1..i-1})
    let mut q = guard(d[0]);
    let mut count = usize::from(q < 0.0);
    let mut off = 1.0 / q;
    for i in 1..n {
        off *= -e[i - 1];
        q = guard(d[i] - e[i - 1] * e[i - 1] / q);
        count += usize::from(q < 0.0);
        off /= q;
    }
    let last = 1.0 / q;
    // backward: p_i = det(T_{i..n}) / det(T_{i+1..n})
    let mut p = guard(d[n - 1]);
    for i in (0..n - 1).rev() {
        p = guard(d[i] - e[i] * e[i] / p);
    }
    (1.0 / p, off, last, count)
}

/// LU factorization with partial pivoting of a general tridiagonal matrix
/// (the classic gttrf/gtts2 scheme).
#[derive(Clone, Debug)]
pub struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    pub fn new(mut dl: Vec<f64>, mut d: Vec<f64>, mut du: Vec<f64>) -> Result<Self> {
        let n = d.len();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        if d.iter().any(|&x| x == 0.0) {
            return Err(Error::Singular);
        }
        Ok(TridiagLu {
            dl,
            d,
            du,
            du2,
            swap,
        })
    }

    /// Symmetric tridiagonal convenience constructor.
    pub fn symmetric(d: &[f64], e: &[f64]) -> Result<Self> {
        Self::new(e.to_vec(), d.to_vec(), e.to_vec())
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        if n == 0 {
            return;
        }
        for i in 0..n - 1 {
            if self.swap[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Cholesky factor of an SPD symmetric tridiagonal matrix: L with diagonal
/// `diag` and subdiagonal `sub`.
#[derive(Clone, Debug)]
pub struct TridiagCholesky {
    pub diag: Vec<f64>,
    pub sub: Vec<f64>,
}

impl TridiagCholesky {
    pub fn new(d: &[f64], e: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut diag = vec![0.0; n];
        let mut sub = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let mut s = d[i];
            if i > 0 {
                sub[i - 1] = e[i - 1] / diag[i - 1];
                s -= sub[i - 1] * sub[i - 1];
            }
            if s <= 0.0 {
                return Err(Error::Singular);
            }
            diag[i] = s.sqrt();
        }
        Ok(TridiagCholesky { diag, sub })
    }

    /// y = L x
    pub fn mul_l(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..x.len() {
            y[i] = self.diag[i] * x[i]
                + if i > 0 {
                    self.sub[i - 1] * x[i - 1]
                } else {
                    0.0
                };
        }
    }

    /// y = L^T x
    pub fn mul_lt(&self, x: &[f64], y: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            y[i] = self.diag[i] * x[i]
                + if i + 1 < n {
                    self.sub[i] * x[i + 1]
                } else {
                    0.0
                };
        }
    }
}
