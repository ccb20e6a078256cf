use nalgebra::DMatrix;

use super::condition::ConditionMap;
use super::potential::{CouplingAssignment, RandomPotentialSpec};
use crate::error::{invalid, Error, Result};
use crate::graph::{EdgeId, EdgeSet, InducedSubgraph, MetricGraph, Side, VertexId};
use crate::linalg::{
    inverse_corners, reverse_cuthill_mckee, sturm_negatives, BandLu, SymBand, TridiagLu,
};

/// Default mesh: h = u / 64.
pub const DEFAULT_MESH_DIVISOR: f64 = 64.0;

pub fn default_mesh(g: &MetricGraph) -> f64 {
    g.u() / DEFAULT_MESH_DIVISOR
}

/// One edge of the mesh: m P1 elements of size `he`, end nodes 0 and m,
/// interior nodes 1..m-1 stored at `int_offset..int_offset + m - 1`.
#[derive(Clone, Debug)]
pub struct EdgeBlock {
    pub edge: EdgeId,
    pub length: f64,
    pub m: usize,
    pub he: f64,
    pub int_offset: usize,
    /// ω_e ν_e on each element
    v_elem: Vec<f64>,
    /// node value at each end as a combination of vertex dofs (empty = Dirichlet)
    ends: [Vec<(usize, f64)>; 2],
}

impl EdgeBlock {
    pub fn n_interior(&self) -> usize {
        self.m - 1
    }

    pub fn potential(&self) -> &[f64] {
        &self.v_elem
    }

    /// Tridiagonal of α A_e + β M_e over nodes 0..=m.
    fn tridiag(&self, alpha: f64, beta: f64, diag: &mut Vec<f64>, off: &mut Vec<f64>) {
        let m = self.m;
        diag.clear();
        diag.resize(m + 1, 0.0);
        off.clear();
        off.resize(m, 0.0);
        let h = self.he;
        for k in 0..m {
            let w = alpha * self.v_elem[k] + beta;
            let dd = alpha / h + w * h / 3.0;
            diag[k] += dd;
            diag[k + 1] += dd;
            off[k] = -alpha / h + w * h / 6.0;
        }
    }

    fn node_map(&self, i: usize) -> NodeMap<'_> {
        if i == 0 {
            NodeMap::Combo(&self.ends[0])
        } else if i == self.m {
            NodeMap::Combo(&self.ends[1])
        } else {
            NodeMap::Single(self.int_offset + i - 1)
        }
    }
}

enum NodeMap<'a> {
    Single(usize),
    Combo(&'a [(usize, f64)]),
}

impl NodeMap<'_> {
    fn for_each(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            NodeMap::Single(p) => f(*p, 1.0),
            NodeMap::Combo(list) => list.iter().for_each(|&(p, c)| f(p, c)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VertexBlock {
    pub vertex: VertexId,
    pub dofs: Vec<usize>,
    /// Q^T L Q in dof coordinates
    pub form: DMatrix<f64>,
}

/// P1 finite-element discretisation of H^{P,L}(ω) restricted to an induced
/// subgraph (Dirichlet at its boundary vertices), in reduced coordinates
/// x = [vertex dofs, interior nodes edge by edge].
#[derive(Clone, Debug)]
pub struct AssembledOperator {
    sub: InducedSubgraph,
    h: f64,
    edges: Vec<EdgeBlock>,
    vertices: Vec<VertexBlock>,
    n_vertex_dofs: usize,
    n_dofs: usize,
    bandwidth: usize,
    s_neg: f64,
}

pub fn assemble(
    sub: &InducedSubgraph,
    conds: &ConditionMap,
    spec: &RandomPotentialSpec,
    omega: &CouplingAssignment,
    h: f64,
) -> Result<AssembledOperator> {
    AssembledOperator::new(sub, conds, spec, omega, h)
}

impl AssembledOperator {
    pub fn new(
        sub: &InducedSubgraph,
        conds: &ConditionMap,
        spec: &RandomPotentialSpec,
        omega: &CouplingAssignment,
        h: f64,
    ) -> Result<Self> {
        let g = sub.parent().as_ref();
        let limit = g.u() / 8.0;
        if !(h > 0.0) {
            return invalid("mesh size must be positive");
        }
        if h > limit * (1.0 + 1e-12) {
            return Err(Error::MeshTooCoarse { h, limit });
        }
        if omega.len() < g.n_edges() {
            return invalid(format!(
                "coupling assignment has {} entries for {} edges",
                omega.len(),
                g.n_edges()
            ));
        }
        if sub.edges().is_empty() {
            return invalid("empty subgraph");
        }

        // vertex dofs in provisional order, then renumbered by RCM
        let mut vblocks = Vec::new();
        let mut dof_of_vertex = std::collections::HashMap::new();
        let mut next = 0;
        let mut s_neg = 0.0f64;
        for &v in sub.inner() {
            let cond = conds.get(v).ok_or(Error::MissingCondition(v))?;
            if cond.degree() != g.degree(v) {
                return Err(Error::BadCondition(format!(
                    "condition of size {} at vertex {v} of degree {}",
                    cond.degree(),
                    g.degree(v)
                )));
            }
            s_neg = s_neg.max(cond.negative_part());
            let k = cond.basis().ncols();
            if k == 0 {
                continue;
            }
            let dofs: Vec<usize> = (next..next + k).collect();
            next += k;
            dof_of_vertex.insert(v, vblocks.len());
            vblocks.push(VertexBlock {
                vertex: v,
                dofs,
                form: cond.reduced_l(),
            });
        }
        let n_vertex_dofs = next;

        let end_map =
            |v: VertexId, e: EdgeId, side: Side, vblocks: &[VertexBlock]| -> Vec<(usize, f64)> {
                let Some(&b) = dof_of_vertex.get(&v) else {
                    return Vec::new();
                };
                let a = g
                    .ends(v)
                    .iter()
                    .position(|end| end.edge == e && end.side == side)
                    .expect("incidence");
                let q = conds.get(v).expect("checked above").basis();
                vblocks[b]
                    .dofs
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| (p, q[(a, k)]))
                    .filter(|&(_, c)| c != 0.0)
                    .collect()
            };

        let mut edges = Vec::with_capacity(sub.edges().len());
        let mut offset = n_vertex_dofs;
        for e in sub.edges().iter() {
            let edge = g.edge(e);
            let len = edge.length;
            let profile = spec.profile_for(e);
            let cells = profile.cells();
            let m0 = ((len / h) - 1e-9).ceil().max(2.0) as usize;
            let m = m0.div_ceil(cells) * cells;
            let he = len / m as f64;
            let w = omega.get(e);
            let v_elem = (0..m)
                .map(|k| w * profile.at((k as f64 + 0.5) / m as f64))
                .collect();
            let ends = [
                end_map(edge.i, e, Side::Initial, &vblocks),
                end_map(edge.j, e, Side::Terminal, &vblocks),
            ];
            edges.push(EdgeBlock {
                edge: e,
                length: len,
                m,
                he,
                int_offset: offset,
                v_elem,
                ends,
            });
            offset += m - 1;
        }

        let mut op = AssembledOperator {
            sub: sub.clone(),
            h,
            edges,
            vertices: vblocks,
            n_vertex_dofs,
            n_dofs: offset,
            bandwidth: 0,
            s_neg,
        };
        op.renumber_vertex_dofs();
        Ok(op)
    }

    fn vertex_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertex_dofs];
        let mut link = |p: usize, q: usize| {
            if p != q {
                adj[p].push(q);
                adj[q].push(p);
            }
        };
        for vb in &self.vertices {
            for &p in &vb.dofs {
                for &q in &vb.dofs {
                    if p < q {
                        link(p, q);
                    }
                }
            }
        }
        for eb in &self.edges {
            for &(p, _) in &eb.ends[0] {
                for &(q, _) in &eb.ends[1] {
                    link(p, q);
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }

    fn renumber_vertex_dofs(&mut self) {
        let perm = reverse_cuthill_mckee(&self.vertex_adjacency());
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        for vb in &mut self.vertices {
            vb.dofs.iter_mut().for_each(|p| *p = inv[*p]);
        }
        for eb in &mut self.edges {
            for end in &mut eb.ends {
                end.iter_mut().for_each(|(p, _)| *p = inv[*p]);
            }
        }
        let adj = self.vertex_adjacency();
        self.bandwidth = adj
            .iter()
            .enumerate()
            .flat_map(|(p, a)| a.iter().map(move |&q| p.abs_diff(q)))
            .max()
            .unwrap_or(0);
    }

    pub fn subgraph(&self) -> &InducedSubgraph {
        &self.sub
    }

    pub fn graph(&self) -> &MetricGraph {
        self.sub.parent()
    }

    pub fn mesh_size(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.n_dofs
    }

    pub fn n_vertex_dofs(&self) -> usize {
        self.n_vertex_dofs
    }

    pub fn vertex_bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn edge_blocks(&self) -> &[EdgeBlock] {
        &self.edges
    }

    pub fn vertex_blocks(&self) -> &[VertexBlock] {
        &self.vertices
    }

    /// Number of nodal values (all edge nodes, both ends included).
    pub fn n_nodes(&self) -> usize {
        self.edges.iter().map(|e| e.m + 1).sum()
    }

    /// Position of a parent edge among the blocks.
    pub fn local_index(&self, e: EdgeId) -> Option<usize> {
        self.sub.edges().index_of(e)
    }

    /// max(0, -min λ(L_v)) over inner vertices.
    pub fn vertex_negative_part(&self) -> f64 {
        self.s_neg
    }

    pub fn potential_min(&self) -> f64 {
        self.edges
            .iter()
            .flat_map(|e| e.v_elem.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }

    /// Lower bound for the whole spectrum from the trace (Sobolev) estimate:
    /// min V − 4S/ε with ε = min{u, 1/(4S)} (just min V when S = 0).
    pub fn analytic_lower_bound(&self) -> f64 {
        let s = self.s_neg;
        let vmin = self.potential_min();
        if s == 0.0 {
            return vmin;
        }
        let eps = self.graph().u().min(1.0 / (4.0 * s));
        vmin - 4.0 * s / eps
    }

    /// Vertex Schur complement G(λ) plus the negative count of all interior
    /// tridiagonals (Haynsworth: In(K) = Σ In(T_e) + In(G)).
    fn schur_for_count(&self, lambda: f64) -> (SymBand, usize) {
        let mut gmat = SymBand::zeros(self.n_vertex_dofs, self.bandwidth);
        let mut neg = 0;
        let (mut d, mut o) = (Vec::new(), Vec::new());
        for eb in &self.edges {
            eb.tridiag(1.0, -lambda, &mut d, &mut o);
            let m = eb.m;
            let (t11, t1n, tnn, cnt) = inverse_corners(&d[1..m], &o[1..m - 1]);
            neg += cnt;
            let (c0, cm) = (o[0], o[m - 1]);
            let s = [
                [d[0] - c0 * c0 * t11, -c0 * cm * t1n],
                [-c0 * cm * t1n, d[m] - cm * cm * tnn],
            ];
            add_edge_schur(&mut gmat, &eb.ends, s);
        }
        self.add_vertex_forms(&mut gmat);
        (gmat, neg)
    }

    fn add_vertex_forms(&self, gmat: &mut SymBand) {
        for vb in &self.vertices {
            for (a, &p) in vb.dofs.iter().enumerate() {
                for (b, &q) in vb.dofs.iter().enumerate().take(a + 1) {
                    gmat.add(p, q, vb.form[(a, b)]);
                }
            }
        }
    }

    /// Number of eigenvalues strictly below λ (inertia of A − λM).
    pub fn count_below(&self, lambda: f64) -> usize {
        let (gmat, neg) = self.schur_for_count(lambda);
        neg + if self.n_vertex_dofs > 0 {
            gmat.negative_count()
        } else {
            0
        }
    }

    /// LU factorisation of A − λM by static condensation.
    pub fn factorize(&self, lambda: f64) -> Result<ShiftedFactor<'_>> {
        let mut gmat = SymBand::zeros(self.n_vertex_dofs, self.bandwidth);
        let mut neg = 0;
        let mut facs = Vec::with_capacity(self.edges.len());
        let (mut d, mut o) = (Vec::new(), Vec::new());
        for eb in &self.edges {
            eb.tridiag(1.0, -lambda, &mut d, &mut o);
            let m = eb.m;
            let n = m - 1;
            let (td, te) = (&d[1..m], &o[1..m - 1]);
            neg += sturm_negatives(td, te);
            let lu = TridiagLu::symmetric(td, te)?;
            let (c0, cm) = (o[0], o[m - 1]);
            let mut z0 = vec![0.0; n];
            z0[0] = c0;
            lu.solve_in_place(&mut z0);
            let mut zm = vec![0.0; n];
            zm[n - 1] = cm;
            lu.solve_in_place(&mut zm);
            let s = [
                [d[0] - c0 * z0[0], -c0 * zm[0]],
                [-cm * z0[n - 1], d[m] - cm * zm[n - 1]],
            ];
            let s01 = 0.5 * (s[0][1] + s[1][0]);
            add_edge_schur(&mut gmat, &eb.ends, [[s[0][0], s01], [s01, s[1][1]]]);
            facs.push(EdgeFactor { lu, z0, zm, c0, cm });
        }
        self.add_vertex_forms(&mut gmat);
        let glu = if self.n_vertex_dofs > 0 {
            Some(BandLu::from_sym(&gmat)?)
        } else {
            None
        };
        if self.n_vertex_dofs > 0 {
            neg += gmat.negative_count();
        }
        Ok(ShiftedFactor {
            op: self,
            lambda,
            edges: facs,
            g: glu,
            negatives: neg,
        })
    }

    /// y = (α A + β M) x in reduced coordinates.
    pub fn apply(&self, alpha: f64, beta: f64, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_dofs];
        let (mut d, mut o) = (Vec::new(), Vec::new());
        let mut f = Vec::new();
        for eb in &self.edges {
            eb.tridiag(alpha, beta, &mut d, &mut o);
            self.expand_edge(eb, x, &mut f);
            let m = eb.m;
            for i in 0..=m {
                let mut v = d[i] * f[i];
                if i > 0 {
                    v += o[i - 1] * f[i - 1];
                }
                if i < m {
                    v += o[i] * f[i + 1];
                }
                eb.node_map(i).for_each(|p, c| y[p] += c * v);
            }
        }
        if alpha != 0.0 {
            for vb in &self.vertices {
                for (a, &p) in vb.dofs.iter().enumerate() {
                    for (b, &q) in vb.dofs.iter().enumerate() {
                        y[p] += alpha * vb.form[(a, b)] * x[q];
                    }
                }
            }
        }
        y
    }

    /// Dense α A + β M (only sensible for small dimensions).
    pub fn dense(&self, alpha: f64, beta: f64) -> DMatrix<f64> {
        let n = self.n_dofs;
        let mut out = DMatrix::zeros(n, n);
        let (mut d, mut o) = (Vec::new(), Vec::new());
        for eb in &self.edges {
            eb.tridiag(alpha, beta, &mut d, &mut o);
            let m = eb.m;
            let mut put = |i: usize, j: usize, v: f64| {
                eb.node_map(i)
                    .for_each(|p, cp| eb.node_map(j).for_each(|q, cq| out[(p, q)] += v * cp * cq));
            };
            for i in 0..=m {
                put(i, i, d[i]);
                if i < m {
                    put(i, i + 1, o[i]);
                    put(i + 1, i, o[i]);
                }
            }
        }
        for vb in &self.vertices {
            for (a, &p) in vb.dofs.iter().enumerate() {
                for (b, &q) in vb.dofs.iter().enumerate() {
                    out[(p, q)] += alpha * vb.form[(a, b)];
                }
            }
        }
        out
    }

    pub fn dense_stiffness(&self) -> DMatrix<f64> {
        self.dense(1.0, 0.0)
    }

    pub fn dense_mass(&self) -> DMatrix<f64> {
        self.dense(0.0, 1.0)
    }

    /// Discrete quadratic form x^T A x.
    pub fn form(&self, x: &[f64]) -> f64 {
        self.apply(1.0, 0.0, x)
            .iter()
            .zip(x)
            .map(|(a, b)| a * b)
            .sum()
    }

    fn expand_edge(&self, eb: &EdgeBlock, x: &[f64], f: &mut Vec<f64>) {
        f.clear();
        f.resize(eb.m + 1, 0.0);
        for (i, fi) in f.iter_mut().enumerate() {
            let mut s = 0.0;
            eb.node_map(i).for_each(|p, c| s += c * x[p]);
            *fi = s;
        }
    }

    /// Z x: nodal values on every edge.
    pub fn expand(&self, x: &[f64]) -> EdgeFunction {
        let mut values = Vec::with_capacity(self.edges.len());
        for eb in &self.edges {
            let mut f = Vec::new();
            self.expand_edge(eb, x, &mut f);
            values.push(f);
        }
        EdgeFunction {
            edges: self.edges.iter().map(|e| e.edge).collect(),
            he: self.edges.iter().map(|e| e.he).collect(),
            values,
        }
    }

    /// Z^T y for nodal data y (adjoint of `expand`).
    pub fn restrict(&self, y: &EdgeFunction) -> Vec<f64> {
        let mut x = vec![0.0; self.n_dofs];
        for (eb, vals) in self.edges.iter().zip(&y.values) {
            for (i, &v) in vals.iter().enumerate() {
                if v != 0.0 {
                    eb.node_map(i).for_each(|p, c| x[p] += c * v);
                }
            }
        }
        x
    }

    /// Z^T M f: the load vector of an L² function given by nodal values.
    pub fn load(&self, f: &EdgeFunction) -> Vec<f64> {
        self.restrict(&f.mass_mul())
    }

    /// A zero function on this mesh.
    pub fn zero_function(&self) -> EdgeFunction {
        EdgeFunction {
            edges: self.edges.iter().map(|e| e.edge).collect(),
            he: self.edges.iter().map(|e| e.he).collect(),
            values: self.edges.iter().map(|e| vec![0.0; e.m + 1]).collect(),
        }
    }

    /// ‖V_ω f‖ / ‖f‖ for the discrete function Z x.
    pub fn potential_ratio(&self, x: &[f64]) -> f64 {
        let f = self.expand(x);
        let (mut num, mut den) = (0.0, 0.0);
        for (eb, vals) in self.edges.iter().zip(&f.values) {
            for k in 0..eb.m {
                let (a, b) = (vals[k], vals[k + 1]);
                let q = eb.he / 3.0 * (a * a + a * b + b * b);
                num += eb.v_elem[k] * eb.v_elem[k] * q;
                den += q;
            }
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }
}

fn add_edge_schur(g: &mut SymBand, ends: &[Vec<(usize, f64)>; 2], s: [[f64; 2]; 2]) {
    for (a, ea) in ends.iter().enumerate() {
        for (b, eb) in ends.iter().enumerate() {
            for &(p, cp) in ea {
                for &(q, cq) in eb {
                    if p >= q {
                        g.add(p, q, s[a][b] * cp * cq);
                    }
                }
            }
        }
    }
}

struct EdgeFactor {
    lu: TridiagLu,
    z0: Vec<f64>,
    zm: Vec<f64>,
    c0: f64,
    cm: f64,
}

/// Factorisation of A − λM; owned by the caller, one per shift.
pub struct ShiftedFactor<'a> {
    op: &'a AssembledOperator,
    lambda: f64,
    edges: Vec<EdgeFactor>,
    g: Option<BandLu>,
    negatives: usize,
}

impl ShiftedFactor<'_> {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of eigenvalues below λ.
    pub fn negatives(&self) -> usize {
        self.negatives
    }

    /// Solves (A − λM) x = b in reduced coordinates.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let op = self.op;
        let nv = op.n_vertex_dofs;
        let mut x = b.to_vec();
        let mut rhs_y = b[..nv].to_vec();
        for (eb, fac) in op.edges.iter().zip(&self.edges) {
            let n = eb.m - 1;
            let w = &mut x[eb.int_offset..eb.int_offset + n];
            fac.lu.solve_in_place(w);
            let (w0, wn) = (fac.c0 * w[0], fac.cm * w[n - 1]);
            eb.ends[0].iter().for_each(|&(p, c)| rhs_y[p] -= c * w0);
            eb.ends[1].iter().for_each(|&(p, c)| rhs_y[p] -= c * wn);
        }
        if let Some(g) = &self.g {
            g.solve_in_place(&mut rhs_y);
        }
        x[..nv].copy_from_slice(&rhs_y);
        for (eb, fac) in op.edges.iter().zip(&self.edges) {
            let xb0: f64 = eb.ends[0].iter().map(|&(p, c)| c * rhs_y[p]).sum();
            let xbm: f64 = eb.ends[1].iter().map(|&(p, c)| c * rhs_y[p]).sum();
            if xb0 == 0.0 && xbm == 0.0 {
                continue;
            }
            let w = &mut x[eb.int_offset..eb.int_offset + eb.m - 1];
            for (i, wi) in w.iter_mut().enumerate() {
                *wi -= xb0 * fac.z0[i] + xbm * fac.zm[i];
            }
        }
        x
    }
}

/// A discrete L² function on a set of edges: P1 nodal values per edge
/// (the two end values of different edges are independent).
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeFunction {
    pub edges: Vec<EdgeId>,
    pub he: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl EdgeFunction {
    pub fn edge_norm_sq(&self, k: usize) -> f64 {
        let f = &self.values[k];
        let h = self.he[k];
        f.windows(2)
            .map(|w| h / 3.0 * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]))
            .sum()
    }

    pub fn edge_deriv_norm_sq(&self, k: usize) -> f64 {
        let h = self.he[k];
        self.values[k]
            .windows(2)
            .map(|w| (w[1] - w[0]).powi(2) / h)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        (0..self.values.len()).map(|k| self.edge_norm_sq(k)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq_on(&self, set: &EdgeSet) -> f64 {
        (0..self.values.len())
            .filter(|&k| set.contains(self.edges[k]))
            .map(|k| self.edge_norm_sq(k))
            .sum()
    }

    pub fn deriv_norm_sq_on(&self, set: &EdgeSet) -> f64 {
        (0..self.values.len())
            .filter(|&k| set.contains(self.edges[k]))
            .map(|k| self.edge_deriv_norm_sq(k))
            .sum()
    }

    /// L² inner product.
    pub fn inner(&self, other: &EdgeFunction) -> f64 {
        let mut s = 0.0;
        for k in 0..self.values.len() {
            let (f, g, h) = (&self.values[k], &other.values[k], self.he[k]);
            for i in 0..f.len() - 1 {
                s += h / 6.0
                    * (2.0 * f[i] * g[i]
                        + f[i] * g[i + 1]
                        + f[i + 1] * g[i]
                        + 2.0 * f[i + 1] * g[i + 1]);
            }
        }
        s
    }

    /// Nodal mass product M_e f per edge.
    pub fn mass_mul(&self) -> EdgeFunction {
        let mut out = self.clone();
        for k in 0..self.values.len() {
            let (f, h) = (&self.values[k], self.he[k]);
            let y = &mut out.values[k];
            let n = f.len();
            for i in 0..n {
                let mut v = 0.0;
                if i > 0 {
                    v += h / 6.0 * (f[i - 1] + 2.0 * f[i]);
                }
                if i + 1 < n {
                    v += h / 6.0 * (2.0 * f[i] + f[i + 1]);
                }
                y[i] = v;
            }
        }
        out
    }

    /// 1_set f.
    pub fn restricted_to(&self, set: &EdgeSet) -> EdgeFunction {
        let mut out = self.clone();
        for (k, vals) in out.values.iter_mut().enumerate() {
            if !set.contains(self.edges[k]) {
                vals.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().flatten().for_each(|v| *v *= s);
    }

    /// Value at (e, t) by linear interpolation.
    pub fn value_at(&self, e: EdgeId, t: f64) -> Option<f64> {
        let k = self.edges.iter().position(|&x| x == e)?;
        let f = &self.values[k];
        let s = (t / self.he[k]).clamp(0.0, (f.len() - 1) as f64);
        let i = (s.floor() as usize).min(f.len() - 2);
        let a = s - i as f64;
        Some((1.0 - a) * f[i] + a * f[i + 1])
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::graph::{build_lattice_graph, Edge};
    use crate::linalg::generalized_eigen;
    use crate::operator::{ConditionSpec, VertexCondition};

    fn single_edge(len: f64) -> Arc<MetricGraph> {
        Arc::new(
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
        )
    }

    fn kirchhoff_star(n: usize) -> Arc<MetricGraph> {
        let edges = (0..n)
            .map(|k| Edge {
                i: 0,
                j: k + 1,
                length: 1.0 + 0.2 * k as f64,
            })
            .collect();
        Arc::new(MetricGraph::from_edges(n + 1, edges).unwrap())
    }

    fn ops_of(g: &Arc<MetricGraph>, spec: &ConditionSpec, omega: f64, h: f64) -> AssembledOperator {
        let conds = ConditionMap::uniform(g, spec).unwrap();
        let sub = InducedSubgraph::full(g.clone());
        let pot = RandomPotentialSpec::uniform(0.0, 2.0);
        assemble(
            &sub,
            &conds,
            &pot,
            &CouplingAssignment::constant(g.n_edges(), omega),
            h,
        )
        .unwrap()
    }

    #[test]
    fn dirichlet_interval() {
        let g = single_edge(std::f64::consts::PI);
        let op = ops_of(
            &g,
            &ConditionSpec::Dirichlet,
            0.0,
            std::f64::consts::PI / 200.0,
        );
        assert_eq!(op.n_vertex_dofs(), 0);
        let (ev, _) = generalized_eigen(&op.dense_stiffness(), &op.dense_mass()).unwrap();
        for k in 1..=5 {
            let want = (k * k) as f64;
            assert!(
                (ev[k - 1] - want).abs() < 1e-3 * want,
                "{} vs {want}",
                ev[k - 1]
            );
        }
        let op = ops_of(
            &g,
            &ConditionSpec::Dirichlet,
            1.5,
            std::f64::consts::PI / 200.0,
        );
        let (ev, _) = generalized_eigen(&op.dense_stiffness(), &op.dense_mass()).unwrap();
        assert!((ev[0] - 2.5).abs() < 1e-3);
    }

    #[test]
    fn mesh_rule() {
        let g = single_edge(1.0);
        let conds = ConditionMap::uniform(&g, &ConditionSpec::Dirichlet).unwrap();
        let sub = InducedSubgraph::full(g.clone());
        let pot = RandomPotentialSpec::uniform(0.0, 1.0);
        let w = CouplingAssignment::constant(1, 0.0);
        assert!(matches!(
            assemble(&sub, &conds, &pot, &w, 0.2),
            Err(Error::MeshTooCoarse { .. })
        ));
        assert!(assemble(&sub, &conds, &pot, &w, 0.125).is_ok());
        let empty = ConditionMap::empty(&g);
        assert!(matches!(
            assemble(&sub, &empty, &pot, &w, 0.1),
            Err(Error::MissingCondition(_))
        ));
    }

    #[test]
    fn star_is_symmetric_and_nonnegative() {
        let g = kirchhoff_star(3);
        let op = ops_of(&g, &ConditionSpec::Kirchhoff, 0.0, 1.0 / 16.0);
        let a = op.dense_stiffness();
        let m = op.dense_mass();
        assert!((&a - a.transpose()).norm() < 1e-12);
        assert!((&m - m.transpose()).norm() < 1e-14);
        assert!(m.clone().cholesky().is_some());
        let (ev, _) = generalized_eigen(&a, &m).unwrap();
        assert!(ev[0].abs() < 1e-9);
        assert!(ev.iter().all(|&x| x > -1e-9));
    }

    #[test]
    fn form_identity_on_piecewise_linear() {
        // x^T A x = ‖f'‖² + Σ<L tr f, tr f> + <V f, f> computed independently
        let g = kirchhoff_star(3);
        let conds = ConditionMap::uniform(&g, &ConditionSpec::Delta { gamma: -0.7 }).unwrap();
        let sub = InducedSubgraph::full(g.clone());
        let pot = RandomPotentialSpec::uniform(1.0, 2.0)
            .with_profile(super::super::Profile::Steps(vec![1.0, 2.0]));
        let w = pot.sample(&g, 5);
        let op = assemble(&sub, &conds, &pot, &w, 1.0 / 16.0).unwrap();
        let x: Vec<f64> = (0..op.dim()).map(|i| (i as f64 * 0.61).sin()).collect();
        let f = op.expand(&x);
        let mut want = 0.0;
        for (k, eb) in op.edge_blocks().iter().enumerate() {
            want += f.edge_deriv_norm_sq(k);
            let vals = &f.values[k];
            // potential: exact integral of V f² with V piecewise constant
            for j in 0..eb.m {
                let (a, b) = (vals[j], vals[j + 1]);
                want += eb.potential()[j] * eb.he / 3.0 * (a * a + a * b + b * b);
            }
        }
        for v in 0..g.n_vertices() {
            let tr: Vec<f64> = g
                .ends(v)
                .iter()
                .map(|end| {
                    let k = op.local_index(end.edge).unwrap();
                    let vals = &f.values[k];
                    if end.side == Side::Initial {
                        vals[0]
                    } else {
                        vals[vals.len() - 1]
                    }
                })
                .collect();
            let c = conds.get(v).unwrap();
            let t = nalgebra::DVector::from_vec(tr);
            want += t.dot(&(c.l() * &t));
        }
        assert!((op.form(&x) - want).abs() < 1e-10 * want.abs().max(1.0));
    }

    #[test]
    fn inertia_matches_dense() {
        let g = Arc::new(build_lattice_graph(2, 2, 1.0).unwrap());
        let conds = ConditionMap::uniform(&g, &ConditionSpec::Delta { gamma: 1.3 }).unwrap();
        let o = g.vertex_at(&[0, 0]).unwrap();
        let sub = InducedSubgraph::new(g.clone(), g.ball_edge_set(o, 2.0).unwrap());
        let pot = RandomPotentialSpec::uniform(1.0, 2.0);
        let w = pot.sample(&g, 11);
        let op = assemble(&sub, &conds, &pot, &w, 1.0 / 8.0).unwrap();
        let (ev, _) = generalized_eigen(&op.dense_stiffness(), &op.dense_mass()).unwrap();
        for lam in [-1.0, 1.7, 5.0, 13.3, 40.0, 101.0] {
            let want = ev.iter().filter(|&&x| x < lam).count();
            assert_eq!(op.count_below(lam), want, "lambda {lam}");
            assert_eq!(op.factorize(lam).unwrap().negatives(), want);
        }
    }

    #[test]
    fn shifted_solve_matches_apply() {
        let g = Arc::new(build_lattice_graph(2, 2, 1.0).unwrap());
        let mut conds = ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff).unwrap();
        // one vertex with a two-dimensional custom condition
        let v = g.vertex_at(&[0, 0]).unwrap();
        let p = nalgebra::DMatrix::from_row_slice(
            4,
            4,
            &[
                0.5, -0.5, 0.0, 0.0, -0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.5, -0.5, 0.0, 0.0, -0.5, 0.5,
            ],
        );
        let q = nalgebra::DMatrix::identity(4, 4) - &p;
        let l = &q * nalgebra::DMatrix::from_fn(4, 4, |i, j| if i == j { 0.3 } else { 0.1 }) * &q;
        conds
            .set(&g, v, VertexCondition::from_matrices(p, l).unwrap())
            .unwrap();
        let sub = InducedSubgraph::full(g.clone());
        let pot = RandomPotentialSpec::uniform(1.0, 2.0);
        let w = pot.sample(&g, 2);
        let op = assemble(&sub, &conds, &pot, &w, 1.0 / 8.0).unwrap();
        let lam = 7.3;
        let fac = op.factorize(lam).unwrap();
        let b: Vec<f64> = (0..op.dim()).map(|i| ((i * 13 % 7) as f64) - 3.0).collect();
        let x = fac.solve(&b);
        let r = op.apply(1.0, -lam, &x);
        let err = r
            .iter()
            .zip(&b)
            .map(|(a, c)| (a - c).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-9, "residual {err}");
    }

    #[test]
    fn lower_bound_holds() {
        let g = kirchhoff_star(4);
        let op = ops_of(&g, &ConditionSpec::Delta { gamma: -2.0 }, 0.5, 1.0 / 16.0);
        let (ev, _) = generalized_eigen(&op.dense_stiffness(), &op.dense_mass()).unwrap();
        assert!(ev[0] < 0.5);
        assert!(ev[0] >= op.analytic_lower_bound());
    }

    #[test]
    fn potential_ratio_bounded() {
        let g = kirchhoff_star(3);
        let conds = ConditionMap::uniform(&g, &ConditionSpec::Kirchhoff).unwrap();
        let pot = RandomPotentialSpec::uniform(-1.0, 0.5)
            .with_profile(super::super::Profile::Steps(vec![1.0, 3.0]));
        let w = pot.sample(&g, 9);
        let op = assemble(
            &InducedSubgraph::full(g.clone()),
            &conds,
            &pot,
            &w,
            1.0 / 16.0,
        )
        .unwrap();
        let c = pot.potential_norm_bound();
        for s in 0..20 {
            let x: Vec<f64> = (0..op.dim())
                .map(|i| ((i + s) as f64 * 1.7).cos())
                .collect();
            assert!(op.potential_ratio(&x) <= c + 1e-12);
        }
    }

    #[test]
    fn restrict_is_adjoint_of_expand() {
        let g = kirchhoff_star(3);
        let op = ops_of(&g, &ConditionSpec::Delta { gamma: 0.4 }, 1.0, 1.0 / 8.0);
        let x: Vec<f64> = (0..op.dim()).map(|i| (i as f64).sin()).collect();
        let mut y = op.zero_function();
        for (k, vals) in y.values.iter_mut().enumerate() {
            for (i, v) in vals.iter_mut().enumerate() {
                *v = ((k * 31 + i) as f64 * 0.3).cos();
            }
        }
        let zx = op.expand(&x);
        let lhs: f64 = zx
            .values
            .iter()
            .flatten()
            .zip(y.values.iter().flatten())
            .map(|(a, b)| a * b)
            .sum();
        let rhs: f64 = op.restrict(&y).iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
        // the load of Z x against x is the mass form
        let mx = op.apply(0.0, 1.0, &x);
        let load = op.load(&zx);
        assert!(mx.iter().zip(&load).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!((zx.inner(&zx) - zx.norm_sq()).abs() < 1e-12);
    }
}
