use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::generalized_eigen;
use crate::operator::AssembledOperator;

/// Reduced dimension up to which the dense generalized eigensolver is used;
/// above it eigenvalues come from spectrum slicing on the inertia counts.
pub const DENSE_LIMIT: usize = 600;

/// Roundoff slack used by the counting function: n(λ) = #{λ_k < λ + tol}.
pub const COUNT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EigenRange {
    /// the k lowest eigenvalues
    Lowest(usize),
    /// all eigenvalues in the closed interval
    Interval(f64, f64),
}

fn slice_tol(x: f64) -> f64 {
    1e-13 * x.abs().max(1.0)
}

fn dense_all(op: &AssembledOperator) -> Result<(Vec<f64>, nalgebra::DMatrix<f64>)> {
    generalized_eigen(&op.dense_stiffness(), &op.dense_mass())
}

/// Index of the first eigenvalue to keep and how many, for a sorted list.
fn select(vals: &[f64], range: EigenRange) -> (usize, usize) {
    match range {
        EigenRange::Lowest(k) => (0, k.min(vals.len())),
        EigenRange::Interval(a, b) => {
            let lo = vals.partition_point(|&x| x < a - slice_tol(a));
            let hi = vals.partition_point(|&x| x <= b + slice_tol(b));
            (lo, hi.saturating_sub(lo))
        }
    }
}

/// A point strictly below the whole spectrum.
fn floor_point(op: &AssembledOperator) -> f64 {
    let mut lo = op.analytic_lower_bound() - 1.0;
    while op.count_below(lo) > 0 {
        lo -= 2.0 * lo.abs().max(1.0);
    }
    lo
}

/// A point with more than k eigenvalues below it, or None if dim <= k.
fn ceiling_point(op: &AssembledOperator, k: usize, from: f64) -> Option<f64> {
    if k >= op.dim() {
        return None;
    }
    let mut step = 1.0;
    let mut hi = from + step;
    while op.count_below(hi) <= k {
        step *= 2.0;
        hi = from + step;
        if !hi.is_finite() {
            return None;
        }
    }
    Some(hi)
}

/// All eigenvalues in [a, b) given counts at the ends, by recursive bisection.
fn slice(op: &AssembledOperator, a: f64, b: f64, na: usize, nb: usize, out: &mut Vec<f64>) {
    if nb <= na {
        return;
    }
    if b - a <= slice_tol(0.5 * (a + b)) {
        let mid = 0.5 * (a + b);
        out.extend(std::iter::repeat_n(mid, nb - na));
        return;
    }
    let mid = 0.5 * (a + b);
    let nm = op.count_below(mid);
    slice(op, a, mid, na, nm.clamp(na, nb), out);
    slice(op, mid, b, nm.clamp(na, nb), nb, out);
}

/// The k-th eigenvalue (0-based) by bisection on the inertia.
pub fn kth_eigenvalue(op: &AssembledOperator, k: usize) -> Option<f64> {
    let mut lo = floor_point(op);
    let mut hi = ceiling_point(op, k, lo)?;
    while hi - lo > slice_tol(0.5 * (lo + hi)) {
        let mid = 0.5 * (lo + hi);
        if op.count_below(mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Lowest eigenvalue of the operator.
pub fn ground_energy(op: &AssembledOperator) -> f64 {
    kth_eigenvalue(op, 0).expect("operator has at least one dof")
}

/// Generalized eigenvalues of (Z^T A Z, Z^T M Z), ascending.
pub fn eigenvalues(op: &AssembledOperator, range: EigenRange) -> Result<Vec<f64>> {
    if let EigenRange::Interval(a, b) = range {
        if a > b {
            return Ok(Vec::new());
        }
    }
    if op.dim() <= DENSE_LIMIT {
        let (vals, _) = dense_all(op)?;
        let (start, len) = select(&vals, range);
        return Ok(vals[start..start + len].to_vec());
    }
    let mut out = Vec::new();
    match range {
        EigenRange::Lowest(k) => {
            if k == 0 {
                return Ok(out);
            }
            let lo = floor_point(op);
            let k = k.min(op.dim());
            let hi = match ceiling_point(op, k - 1, lo) {
                Some(h) => h,
                None => return invalid_range(),
            };
            let nb = op.count_below(hi);
            slice(op, lo, hi, 0, nb, &mut out);
            out.truncate(k);
        }
        EigenRange::Interval(a, b) => {
            let (a, b) = (a - slice_tol(a), b + slice_tol(b));
            let (na, nb) = (op.count_below(a), op.count_below(b));
            slice(op, a, b, na, nb, &mut out);
        }
    }
    Ok(out)
}

fn invalid_range<T>() -> Result<T> {
    Err(Error::Invalid(
        "requested more eigenvalues than the discrete dimension".into(),
    ))
}

/// Eigenpairs with M-orthonormal reduced eigenvectors.
pub fn eigenpairs(op: &AssembledOperator, range: EigenRange) -> Result<Vec<(f64, Vec<f64>)>> {
    if op.dim() <= DENSE_LIMIT {
        let (vals, vecs) = dense_all(op)?;
        let (start, len) = select(&vals, range);
        return Ok((start..start + len)
            .map(|k| (vals[k], vecs.column(k).iter().copied().collect()))
            .collect());
    }
    let vals = eigenvalues(op, range)?;
    let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(vals.len());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut cluster_start = 0;
    for (idx, &lam) in vals.iter().enumerate() {
        if idx > 0 && (lam - vals[idx - 1]).abs() > 1e-8 * lam.abs().max(1.0) {
            cluster_start = idx;
        }
        let (l, v) = inverse_iteration(op, lam, &out[cluster_start..], &mut rng)?;
        out.push((l, v));
    }
    Ok(out)
}

fn m_dot(op: &AssembledOperator, x: &[f64], y: &[f64]) -> f64 {
    op.apply(0.0, 1.0, x)
        .iter()
        .zip(y)
        .map(|(a, b)| a * b)
        .sum()
}

/// Inverse iteration near λ, M-orthogonal to the vectors in `against`.
fn inverse_iteration(
    op: &AssembledOperator,
    lam: f64,
    against: &[(f64, Vec<f64>)],
    rng: &mut ChaCha8Rng,
) -> Result<(f64, Vec<f64>)> {
    let mut shift = lam + 1e-10 * lam.abs().max(1.0);
    let fac = loop {
        match op.factorize(shift) {
            Ok(f) => break f,
            Err(Error::Singular) => shift += 1e-9 * shift.abs().max(1.0),
            Err(e) => return Err(e),
        }
    };
    let mut x: Vec<f64> = (0..op.dim()).map(|_| rng.random::<f64>() - 0.5).collect();
    for _ in 0..4 {
        for (_, q) in against {
            let c = m_dot(op, &x, q);
            x.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        let b = op.apply(0.0, 1.0, &x);
        x = fac.solve(&b);
        let n = m_dot(op, &x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= n);
    }
    for (_, q) in against {
        let c = m_dot(op, &x, q);
        x.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
    }
    let n = m_dot(op, &x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= n);
    let rq = op.form(&x);
    Ok((rq, x))
}

/// ‖A x − λ M x‖ / ‖x‖ in the reduced space.
pub fn residual(op: &AssembledOperator, lam: f64, x: &[f64]) -> f64 {
    let r = op.apply(1.0, -lam, x);
    let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    rn / xn
}

/// n(λ): eigenvalues ≤ λ counted with multiplicity.
pub fn counting(op: &AssembledOperator, lambda: f64) -> usize {
    op.count_below(lambda + COUNT_TOL * lambda.abs().max(1.0))
}

/// n(λ) on a whole grid; uses one dense eigensolve when the operator is small.
pub fn counting_grid(op: &AssembledOperator, grid: &[f64]) -> Result<Vec<usize>> {
    if op.dim() <= DENSE_LIMIT && grid.len() > 8 {
        let (vals, _) = dense_all(op)?;
        return Ok(grid
            .iter()
            .map(|&l| vals.partition_point(|&x| x <= l + COUNT_TOL * l.abs().max(1.0)))
            .collect());
    }
    Ok(grid.iter().map(|&l| counting(op, l)).collect())
}

/// Number of eigenvalues in the closed interval [a, b].
pub fn count_in(op: &AssembledOperator, a: f64, b: f64) -> usize {
    if a > b {
        return 0;
    }
    counting(op, b) - op.count_below(a - COUNT_TOL * a.abs().max(1.0))
}

/// dist(λ, σ(op)), from the neighbouring eigenvalues found by bisection.
pub fn distance_to_spectrum(op: &AssembledOperator, lambda: f64) -> f64 {
    let k = op.count_below(lambda);
    let below = if k > 0 {
        kth_eigenvalue(op, k - 1).map(|x| lambda - x)
    } else {
        None
    };
    let above = kth_eigenvalue(op, k).map(|x| x - lambda);
    below
        .into_iter()
        .chain(above)
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::graph::{build_lattice_graph, Edge, InducedSubgraph, MetricGraph};
    use crate::operator::{
        assemble, ConditionMap, ConditionSpec, CouplingAssignment, RandomPotentialSpec,
    };

    fn edge_op(len: f64, h: f64) -> AssembledOperator {
        let g = Arc::new(
            MetricGraph::new(
                2,
                vec![Edge {
                    i: 0,
                    j: 1,
                    length: len,
                }],
                len,
                len,
            )
            .unwrap(),
        );
        let conds = ConditionMap::uniform(&g, &ConditionSpec::Dirichlet).unwrap();
        assemble(
            &InducedSubgraph::full(g),
            &conds,
            &RandomPotentialSpec::uniform(0.0, 1.0),
            &CouplingAssignment::constant(1, 0.0),
            h,
        )
        .unwrap()
    }

    #[test]
    fn dirichlet_edges_both_routes() {
        let dense = edge_op(PI, PI / 200.0);
        assert!(dense.dim() <= DENSE_LIMIT);
        let big = edge_op(PI, PI / 1000.0);
        assert!(big.dim() > DENSE_LIMIT);
        for op in [&dense, &big] {
            let ev = eigenvalues(op, EigenRange::Lowest(5)).unwrap();
            for (k, &x) in ev.iter().enumerate() {
                let want = ((k + 1) * (k + 1)) as f64;
                assert!((x - want).abs() < 1e-3 * want);
            }
            let pairs = eigenpairs(op, EigenRange::Lowest(3)).unwrap();
            for (l, v) in &pairs {
                assert!(
                    residual(op, *l, v) < 1e-8,
                    "residual {}",
                    residual(op, *l, v)
                );
            }
        }
        let unit = edge_op(1.0, 1.0 / 200.0);
        let ev = eigenvalues(&unit, EigenRange::Lowest(2)).unwrap();
        assert!((ev[0] / (PI * PI) - 1.0).abs() < 1e-3);
        assert!((ev[1] / (4.0 * PI * PI) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn counting_formula_and_closedness() {
        let op = edge_op(PI, PI / 200.0);
        assert_eq!(counting(&op, 10.0), 3);
        assert_eq!(counting(&op, 0.5), 0);
        let big = edge_op(PI, PI / 1000.0);
        let l2 = kth_eigenvalue(&big, 1).unwrap();
        assert_eq!(counting(&big, l2), 2);
        assert_eq!(counting(&big, l2 - 1e-6), 1);
        assert_eq!(count_in(&big, l2, l2), 1);
    }

    #[test]
    fn slicing_agrees_with_dense() {
        let g = Arc::new(build_lattice_graph(2, 3, 1.0).unwrap());
        let conds = ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff).unwrap();
        let o = g.vertex_at(&[0, 0]).unwrap();
        let sub = InducedSubgraph::new(g.clone(), g.ball_edge_set(o, 2.0).unwrap());
        let pot = RandomPotentialSpec::uniform(1.0, 2.0);
        let op = assemble(&sub, &conds, &pot, &pot.sample(&g, 1), 1.0 / 64.0).unwrap();
        assert!(op.dim() > DENSE_LIMIT);
        let (all, _) = generalized_eigen(&op.dense_stiffness(), &op.dense_mass()).unwrap();
        let sl = eigenvalues(&op, EigenRange::Interval(2.0, 30.0)).unwrap();
        let want: Vec<f64> = all
            .iter()
            .copied()
            .filter(|&x| (2.0..=30.0).contains(&x))
            .collect();
        assert_eq!(sl.len(), want.len());
        for (a, b) in sl.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0));
        }
        let low = eigenvalues(&op, EigenRange::Lowest(6)).unwrap();
        for (a, b) in low.iter().zip(&all) {
            assert!((a - b).abs() < 1e-8 * b.abs().max(1.0));
        }
        // degenerate clusters get orthogonal vectors
        let pairs = eigenpairs(&op, EigenRange::Lowest(6)).unwrap();
        for i in 0..6 {
            assert!(residual(&op, pairs[i].0, &pairs[i].1) < 1e-8);
            for j in 0..i {
                assert!(m_dot(&op, &pairs[i].1, &pairs[j].1).abs() < 1e-8);
            }
        }
        let d = distance_to_spectrum(&op, 5.0);
        let want = all
            .iter()
            .map(|x| (x - 5.0).abs())
            .fold(f64::INFINITY, f64::min);
        assert!((d - want).abs() < 1e-9);
    }

    #[test]
    fn empty_interval() {
        let op = edge_op(PI, PI / 200.0);
        assert!(eigenvalues(&op, EigenRange::Interval(1.5, 3.5))
            .unwrap()
            .is_empty());
        assert!(eigenvalues(&op, EigenRange::Interval(3.0, 2.0))
            .unwrap()
            .is_empty());
    }
}
