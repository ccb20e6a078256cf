use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, VertexId};

const TOL: f64 = 1e-10;

/// JSON/config form of a vertex condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConditionSpec {
    Dirichlet,
    Kirchhoff,
    Delta {
        gamma: f64,
    },
    Custom {
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
        #[serde(rename = "L")]
        l: Vec<Vec<f64>>,
    },
}

/// The pair (P_v, L_v): P_v tr_v f = 0 and L_v tr_v f = (1 - P_v) str_v f'.
/// Coordinates follow the end order of `MetricGraph::ends(v)`.
#[derive(Clone, Debug)]
pub struct VertexCondition {
    p: DMatrix<f64>,
    l: DMatrix<f64>,
    /// orthonormal basis of range(1 - P), d_v x k_v
    basis: DMatrix<f64>,
}

fn to_matrix(rows: &[Vec<f64>], d: usize, name: &str) -> Result<DMatrix<f64>> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::BadCondition(format!("{name} must be {d}x{d}")));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

impl VertexCondition {
    /// Builds a condition from explicit matrices after checking
    /// P^2 = P = P^T, L = L^T and L = (1-P) L (1-P).
    pub fn from_matrices(p: DMatrix<f64>, l: DMatrix<f64>) -> Result<Self> {
        let d = p.nrows();
        if d == 0 || p.ncols() != d || l.nrows() != d || l.ncols() != d {
            return Err(Error::BadCondition(
                "P and L must be square of the vertex degree".into(),
            ));
        }
        let scale = |m: &DMatrix<f64>| m.norm().max(1.0);
        if (&p - p.transpose()).norm() > TOL * scale(&p) {
            return Err(Error::BadCondition("P is not symmetric".into()));
        }
        let p = (&p + p.transpose()) * 0.5;
        if (&p * &p - &p).norm() > TOL * scale(&p) {
            return Err(Error::BadCondition("P is not a projection".into()));
        }
        if (&l - l.transpose()).norm() > TOL * scale(&l) {
            return Err(Error::BadCondition("L is not symmetric".into()));
        }
        let l = (&l + l.transpose()) * 0.5;
        let q = DMatrix::identity(d, d) - &p;
        if (&q * &l * &q - &l).norm() > TOL * scale(&l) {
            return Err(Error::BadCondition("L does not act on range(1 - P)".into()));
        }
        let eig = SymmetricEigen::new(q);
        let mut cols: Vec<usize> = (0..d).filter(|&k| eig.eigenvalues[k] > 0.5).collect();
        cols.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .total_cmp(&eig.eigenvalues[a])
                .then(a.cmp(&b))
        });
        let basis = DMatrix::from_fn(d, cols.len(), |i, k| eig.eigenvectors[(i, cols[k])]);
        Ok(VertexCondition { p, l, basis })
    }

    pub fn dirichlet(degree: usize) -> Self {
        VertexCondition {
            p: DMatrix::identity(degree, degree),
            l: DMatrix::zeros(degree, degree),
            basis: DMatrix::zeros(degree, 0),
        }
    }

    pub fn kirchhoff(degree: usize) -> Self {
        Self::delta(degree, 0.0)
    }

    /// Continuity plus Σ ingoing derivatives = γ f(v): L = (γ/d²) J on the
    /// constants, so that ⟨L tr f, tr f⟩ = γ |f(v)|².
    pub fn delta(degree: usize, gamma: f64) -> Self {
        let d = degree as f64;
        let j = DMatrix::from_element(degree, degree, 1.0 / d);
        VertexCondition {
            p: DMatrix::identity(degree, degree) - &j,
            l: j * (gamma / d),
            basis: DMatrix::from_element(degree, 1, 1.0 / d.sqrt()),
        }
    }

    pub fn from_spec(spec: &ConditionSpec, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::BadCondition(
                "vertex degree must be at least 1".into(),
            ));
        }
        Ok(match spec {
            ConditionSpec::Dirichlet => Self::dirichlet(degree),
            ConditionSpec::Kirchhoff => Self::kirchhoff(degree),
            ConditionSpec::Delta { gamma } => Self::delta(degree, *gamma),
            ConditionSpec::Custom { p, l } => {
                Self::from_matrices(to_matrix(p, degree, "P")?, to_matrix(l, degree, "L")?)?
            }
        })
    }

    /// Block-diagonal combination: the ends of `self` come first.
    pub fn direct_sum(&self, other: &VertexCondition) -> VertexCondition {
        let (a, b) = (self.degree(), other.degree());
        let (ka, kb) = (self.basis.ncols(), other.basis.ncols());
        let mut p = DMatrix::zeros(a + b, a + b);
        let mut l = DMatrix::zeros(a + b, a + b);
        let mut basis = DMatrix::zeros(a + b, ka + kb);
        p.view_mut((0, 0), (a, a)).copy_from(&self.p);
        p.view_mut((a, a), (b, b)).copy_from(&other.p);
        l.view_mut((0, 0), (a, a)).copy_from(&self.l);
        l.view_mut((a, a), (b, b)).copy_from(&other.l);
        basis.view_mut((0, 0), (a, ka)).copy_from(&self.basis);
        basis.view_mut((a, ka), (b, kb)).copy_from(&other.basis);
        VertexCondition { p, l, basis }
    }

    pub fn degree(&self) -> usize {
        self.p.nrows()
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// Orthonormal basis Q of range(1 - P): admissible traces are Q y.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Q^T L Q, the vertex form in basis coordinates.
    pub fn reduced_l(&self) -> DMatrix<f64> {
        self.basis.transpose() * &self.l * &self.basis
    }

    /// S_v = max(0, -λ_min(L_v)).
    pub fn negative_part(&self) -> f64 {
        if self.l.nrows() == 0 {
            return 0.0;
        }
        let min = self
            .l
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        (-min).max(0.0)
    }
}

/// Vertex conditions for every vertex of a graph (missing entries allowed;
/// assembly errors if a needed one is missing).
#[derive(Clone, Debug)]
pub struct ConditionMap {
    conds: Vec<Option<VertexCondition>>,
}

impl ConditionMap {
    pub fn uniform(g: &MetricGraph, spec: &ConditionSpec) -> Result<Self> {
        let conds = (0..g.n_vertices())
            .map(|v| VertexCondition::from_spec(spec, g.degree(v)).map(Some))
            .collect::<Result<_>>()?;
        Ok(ConditionMap { conds })
    }

    pub fn empty(g: &MetricGraph) -> Self {
        ConditionMap {
            conds: vec![None; g.n_vertices()],
        }
    }

    pub fn from_specs(
        g: &MetricGraph,
        default: Option<&ConditionSpec>,
        overrides: &BTreeMap<VertexId, ConditionSpec>,
    ) -> Result<Self> {
        let mut map = match default {
            Some(spec) => Self::uniform(g, spec)?,
            None => Self::empty(g),
        };
        for (&v, spec) in overrides {
            if v >= g.n_vertices() {
                return Err(Error::BadCondition(format!("vertex {v} does not exist")));
            }
            map.set(g, v, VertexCondition::from_spec(spec, g.degree(v))?)?;
        }
        Ok(map)
    }

    pub fn set(&mut self, g: &MetricGraph, v: VertexId, cond: VertexCondition) -> Result<()> {
        if cond.degree() != g.degree(v) {
            return Err(Error::BadCondition(format!(
                "condition of size {} at vertex {v} of degree {}",
                cond.degree(),
                g.degree(v)
            )));
        }
        self.conds[v] = Some(cond);
        Ok(())
    }

    pub fn get(&self, v: VertexId) -> Option<&VertexCondition> {
        self.conds.get(v).and_then(Option::as_ref)
    }

    /// Grows the map for a graph with extra vertices appended.
    pub fn extend_to(&mut self, g: &MetricGraph) {
        self.conds.resize(g.n_vertices(), None);
    }

    /// Global lower bound S for the negative parts of all L_v.
    pub fn lower_bound_s(&self) -> f64 {
        self.conds
            .iter()
            .flatten()
            .map(VertexCondition::negative_part)
            .fold(0.0, f64::max)
    }
}
