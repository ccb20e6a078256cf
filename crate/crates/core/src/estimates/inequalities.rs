use serde::{Deserialize, Serialize};

use super::{Model, Verdict};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, EdgeSet, MetricGraph, VertexId};
use crate::operator::{AssembledOperator, CouplingAssignment, EdgeFunction};
use crate::spectral::{eigenpairs, BlockNormOptions, EigenRange, Resolvent};

/// The k-th eigenpair (0-based) of an operator, as a function on its edges
/// with unit L² norm.
pub fn eigenfunction(op: &AssembledOperator, k: usize) -> Result<(f64, EdgeFunction)> {
    let pairs = eigenpairs(op, EigenRange::Lowest(k + 1))?;
    let (lam, x) = pairs
        .into_iter()
        .nth(k)
        .ok_or_else(|| Error::Invalid(format!("no eigenpair {k}")))?;
    let mut f = op.expand(&x);
    let n = f.norm();
    f.scale(1.0 / n);
    Ok((lam, f))
}

/// f ≡ value on the given edges, m = ⌈l_e / h⌉ elements per edge.
pub fn constant_function(g: &MetricGraph, edges: &EdgeSet, value: f64, h: f64) -> EdgeFunction {
    let mut f = EdgeFunction {
        edges: Vec::new(),
        he: Vec::new(),
        values: Vec::new(),
    };
    for e in edges.iter() {
        let l = g.length(e);
        let m = ((l / h).ceil() as usize).max(1);
        f.edges.push(e);
        f.he.push(l / m as f64);
        f.values.push(vec![value; m + 1]);
    }
    f
}

/// ‖f′‖_{E3} / (‖f‖_{E4} + ‖g‖_{E4}) for Hf = g; E3 ⊆ E4 and every vertex
/// where E3 meets other edges must be inner to E4.
pub fn caccioppoli_check(
    op: &AssembledOperator,
    f: &EdgeFunction,
    g_rhs: &EdgeFunction,
    e3: &EdgeSet,
    e4: &EdgeSet,
) -> Result<f64> {
    let graph = op.graph();
    if !e3.is_subset(e4) || !e4.is_subset(op.subgraph().edges()) {
        return Err(Error::Geometry(
            "need E3 ⊆ E4 ⊆ the operator's edges".into(),
        ));
    }
    for v in e3.vertices(graph) {
        let ends = graph.ends(v);
        if ends.iter().any(|end| !e3.contains(end.edge))
            && ends.iter().any(|end| !e4.contains(end.edge))
        {
            return Err(Error::Geometry(format!(
                "boundary vertex {v} of E3 is not inner to E4"
            )));
        }
    }
    let num = f.deriv_norm_sq_on(e3).sqrt();
    if num == 0.0 {
        return Ok(0.0);
    }
    Ok(num / (f.norm_sq_on(e4).sqrt() + g_rhs.norm_sq_on(e4).sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayVerdict {
    /// ‖1_{Λint} f‖
    pub inner_norm: f64,
    /// ‖1_{Λout} (H^{Λ_r(v)} − λ)^{-1} 1_{Λint}‖
    pub block_norm: f64,
    /// ‖1_{Λout} f‖
    pub outer_norm: f64,
    /// the smallest constant making the inequality true
    pub c_vef_needed: f64,
    /// c_max · block · outer − inner
    pub slack: f64,
    pub verdict: Verdict,
}

/// ‖1_{Λint} f‖ ≤ C_VEF ‖1_{Λout} G 1_{Λint}‖ ‖1_{Λout} f‖ for an
/// eigenfunction f with value λ of a larger domain.
#[allow(clippy::too_many_arguments)]
pub fn eigenfunction_decay_check(
    model: &Model,
    omega: &CouplingAssignment,
    v: VertexId,
    r: f64,
    lambda: f64,
    f: &EdgeFunction,
    c_max: f64,
) -> Result<DecayVerdict> {
    let (int, out) = model.graph.interior_exterior(v, r)?;
    let op = model.ball_operator(omega, v, r)?;
    let res = Resolvent::new(&op, lambda)?;
    let opts = BlockNormOptions {
        tol: 1e-9,
        max_iter: 2000,
        dense_limit: 128,
    };
    let block_norm = res.block_norm(&out, &int, &opts)?.value;
    let inner_norm = f.norm_sq_on(&int).sqrt();
    let outer_norm = f.norm_sq_on(&out).sqrt();
    let c_vef_needed = if inner_norm == 0.0 {
        0.0
    } else {
        inner_norm / (block_norm * outer_norm)
    };
    let slack = c_max * block_norm * outer_norm - inner_norm;
    Ok(DecayVerdict {
        inner_norm,
        block_norm,
        outer_norm,
        c_vef_needed,
        slack,
        verdict: (c_vef_needed <= c_max).into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub lambda: f64,
    /// max over edges with ‖f‖_e > 1e-10 of ‖f′‖²_e / ‖f‖²_e
    pub max_ratio: f64,
    pub edge: Option<EdgeId>,
}

/// Per-edge ‖f′‖² / ‖f‖² of an eigenfunction of `op` with value λ.
pub fn cone_estimate_check(
    op: &AssembledOperator,
    f: &EdgeFunction,
    lambda: f64,
) -> Result<ConeReport> {
    if let Some(&e) = f.edges.iter().find(|&&e| op.local_index(e).is_none()) {
        return Err(Error::Invalid(format!(
            "edge {e} is not part of the operator"
        )));
    }
    let mut rep = ConeReport {
        lambda,
        max_ratio: 0.0,
        edge: None,
    };
    for k in 0..f.edges.len() {
        let n2 = f.edge_norm_sq(k);
        if n2.sqrt() <= 1e-10 {
            continue;
        }
        let ratio = f.edge_deriv_norm_sq(k) / n2;
        if rep.edge.is_none() || ratio > rep.max_ratio {
            rep.max_ratio = ratio;
            rep.edge = Some(f.edges[k]);
        }
    }
    Ok(rep)
}

/// ‖w^{-1} f‖ with w(x) = (1 + dist(x, root))^m, weight taken at element midpoints.
pub fn weighted_norm(g: &MetricGraph, f: &EdgeFunction, root: VertexId, m: f64) -> f64 {
    let dist = g.vertex_distances(root);
    let mut s = 0.0;
    for (k, &e) in f.edges.iter().enumerate() {
        let (vals, h) = (&f.values[k], f.he[k]);
        for (i, w) in vals.windows(2).enumerate() {
            let t = (i as f64 + 0.5) * h;
            let x = MetricGraph::distance_on_edge(&dist, g, e, t);
            s += h / 3.0 * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]) * (1.0 + x).powf(-2.0 * m);
        }
    }
    s.sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub r: f64,
    pub norm: f64,
    /// R^d (1 + dist(v, root) + R + U)^{(d+2)/2}
    pub shape: f64,
    pub ratio: f64,
}

/// ‖1_{Λ_R(v)} f‖ against the polynomial growth profile, per radius.
pub fn ball_growth_table(
    g: &MetricGraph,
    f: &EdgeFunction,
    root: VertexId,
    v: VertexId,
    radii: &[f64],
    d: f64,
) -> Result<Vec<GrowthRow>> {
    let dv = g.vertex_distances(root)[v];
    radii
        .iter()
        .map(|&r| {
            let norm = f.norm_sq_on(&g.ball_edge_set(v, r)?).sqrt();
            let shape = r.powf(d) * (1.0 + dv + r + g.big_u()).powf((d + 2.0) / 2.0);
            Ok(GrowthRow {
                r,
                norm,
                shape,
                ratio: norm / shape,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summability {
    /// increments of ‖w^{-1}f‖² between consecutive boxes
    pub increments: Vec<f64>,
    /// p with last increment ratio = 2^{−p} (boxes doubling in size)
    pub decay_exponent: f64,
    pub divergent: bool,
}

/// Reads weighted norms on boxes of doubling size and flags divergence when
/// the squared-norm increments stop shrinking (decay exponent below 1/4).
pub fn summability(norms: &[f64]) -> Result<Summability> {
    if norms.len() < 3 {
        return Err(Error::Invalid("need norms on at least three boxes".into()));
    }
    let sq: Vec<f64> = norms.iter().map(|x| x * x).collect();
    let increments: Vec<f64> = sq.windows(2).map(|w| w[1] - w[0]).collect();
    let k = increments.len();
    let (a, b) = (increments[k - 2], increments[k - 1]);
    let decay_exponent = if b <= 0.0 {
        f64::INFINITY
    } else {
        -(b / a).log2()
    };
    Ok(Summability {
        increments,
        decay_exponent,
        divergent: decay_exponent < 0.25,
    })
}
