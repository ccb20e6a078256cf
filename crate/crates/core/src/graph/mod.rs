//! Metric graphs: edges with lengths, vertices with incidence lists, and
//! the finite lattice/Cayley boxes used as ambient geometry.

mod distance;
mod growth;
mod subgraph;

pub use distance::{DistanceWorkspace, DIST_EPS};
pub use growth::{estimate_growth, GrowthEstimate, GrowthSample};
pub use subgraph::{EdgeSet, InducedSubgraph};

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    /// the end at i(e), parameter 0
    Initial,
    /// the end at j(e), parameter l(e)
    Terminal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeEnd {
    pub edge: EdgeId,
    pub side: Side,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: VertexId,
    pub j: VertexId,
    pub length: f64,
}

impl Edge {
    pub fn endpoint(&self, side: Side) -> VertexId {
        match side {
            Side::Initial => self.i,
            Side::Terminal => self.j,
        }
    }
}

/// A point of the metric graph: a vertex or an interior point (e, t), 0 < t < l(e).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GraphPoint {
    Vertex(VertexId),
    Interior { edge: EdgeId, t: f64 },
}

#[derive(Clone, Debug)]
pub struct MetricGraph {
    n_vertices: usize,
    edges: Vec<Edge>,
    incidence: Vec<Vec<EdgeEnd>>,
    u: f64,
    big_u: f64,
    coords: Vec<Option<Vec<i64>>>,
    coord_index: HashMap<Vec<i64>, VertexId>,
    truncated: Vec<bool>,
}

impl MetricGraph {
    /// Builds a graph with explicit length bounds `u <= l(e) <= U`.
    pub fn new(n_vertices: usize, edges: Vec<Edge>, u: f64, big_u: f64) -> Result<Self> {
        if !(u > 0.0 && u <= big_u && big_u.is_finite()) {
            return invalid(format!(
                "edge length bounds must satisfy 0 < u <= U < inf, got u={u}, U={big_u}"
            ));
        }
        let mut incidence = vec![Vec::new(); n_vertices];
        for (id, e) in edges.iter().enumerate() {
            if e.i >= n_vertices || e.j >= n_vertices {
                return invalid(format!("edge {id} references a missing vertex"));
            }
            if !(e.length > 0.0 && e.length.is_finite()) {
                return invalid(format!("edge {id} has non-positive length {}", e.length));
            }
            if e.length < u * (1.0 - 1e-12) || e.length > big_u * (1.0 + 1e-12) {
                return invalid(format!(
                    "edge {id} length {} outside [{u}, {big_u}]",
                    e.length
                ));
            }
            incidence[e.i].push(EdgeEnd {
                edge: id,
                side: Side::Initial,
            });
            incidence[e.j].push(EdgeEnd {
                edge: id,
                side: Side::Terminal,
            });
        }
        if let Some(v) = incidence.iter().position(|l| l.is_empty()) {
            if n_vertices > 1 || edges.is_empty() {
                return invalid(format!("vertex {v} is isolated"));
            }
        }
        for list in &mut incidence {
            list.sort();
        }
        let g = MetricGraph {
            n_vertices,
            edges,
            incidence,
            u,
            big_u,
            coords: vec![None; n_vertices],
            coord_index: HashMap::new(),
            truncated: vec![false; n_vertices],
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// Builds a graph taking u and U as the extreme edge lengths.
    pub fn from_edges(n_vertices: usize, edges: Vec<Edge>) -> Result<Self> {
        if edges.is_empty() {
            return invalid("graph without edges");
        }
        let u = edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min);
        let big_u = edges.iter().map(|e| e.length).fold(0.0, f64::max);
        Self::new(n_vertices, edges, u, big_u)
    }

    fn is_connected(&self) -> bool {
        if self.n_vertices == 0 {
            return false;
        }
        let mut seen = vec![false; self.n_vertices];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for end in &self.incidence[v] {
                let w = self.opposite(end);
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n_vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn length(&self, e: EdgeId) -> f64 {
        self.edges[e].length
    }

    /// Lower edge-length bound u.
    pub fn u(&self) -> f64 {
        self.u
    }

    /// Upper edge-length bound U.
    pub fn big_u(&self) -> f64 {
        self.big_u
    }

    /// Ends of edges at `v`, sorted by (edge id, side). Loops appear twice.
    /// This order fixes the coordinates of tr_v and of the matrices P_v, L_v.
    pub fn ends(&self, v: VertexId) -> &[EdgeEnd] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.incidence.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Vertex at the other end of `end`'s edge.
    pub fn opposite(&self, end: &EdgeEnd) -> VertexId {
        let e = &self.edges[end.edge];
        match end.side {
            Side::Initial => e.j,
            Side::Terminal => e.i,
        }
    }

    pub fn point(&self, edge: EdgeId, t: f64) -> Result<GraphPoint> {
        let l = self.length(edge);
        if !(t > 0.0 && t < l) {
            return invalid(format!("edge parameter {t} not in (0, {l})"));
        }
        Ok(GraphPoint::Interior { edge, t })
    }

    pub fn coords(&self, v: VertexId) -> Option<&[i64]> {
        self.coords[v].as_deref()
    }

    pub fn vertex_at(&self, coords: &[i64]) -> Option<VertexId> {
        self.coord_index.get(coords).copied()
    }

    /// True for vertices of a finite box that have fewer edges than in the
    /// infinite graph the box approximates.
    pub fn is_truncated(&self, v: VertexId) -> bool {
        self.truncated[v]
    }

    pub fn truncated_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n_vertices).filter(|&v| self.truncated[v])
    }

    pub(crate) fn set_coords(&mut self, coords: Vec<Option<Vec<i64>>>) {
        self.coord_index = coords
            .iter()
            .enumerate()
            .filter_map(|(v, c)| c.clone().map(|c| (c, v)))
            .collect();
        self.coords = coords;
    }

    pub(crate) fn set_truncated(&mut self, truncated: Vec<bool>) {
        self.truncated = truncated;
    }

    /// Some edge joining `a` to `b` (in this direction) of the given length.
    pub fn find_edge(&self, a: VertexId, b: VertexId, length: f64) -> Option<EdgeId> {
        self.incidence[a]
            .iter()
            .filter(|end| end.side == Side::Initial)
            .map(|end| end.edge)
            .find(|&e| {
                self.edges[e].j == b && (self.edges[e].length - length).abs() <= 1e-12 * length
            })
    }

    /// Shifts an edge of a lattice or Cayley box by the group element `k`.
    pub fn shift_edge(&self, e: EdgeId, k: &[i64]) -> Option<EdgeId> {
        let edge = &self.edges[e];
        let shift = |v: VertexId| -> Option<VertexId> {
            let c = self.coords(v)?;
            if c.len() != k.len() {
                return None;
            }
            let moved: Vec<i64> = c.iter().zip(k).map(|(a, b)| a + b).collect();
            self.vertex_at(&moved)
        };
        let (a, b) = (shift(edge.i)?, shift(edge.j)?);
        self.find_edge(a, b, edge.length)
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: (0..self.n_vertices).collect(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(id, e)| EdgeSpec {
                    id,
                    i: e.i,
                    j: e.j,
                    length: e.length,
                })
                .collect(),
            u: self.u,
            big_u: self.big_u,
            coords: if self.coords.iter().any(Option::is_some) {
                Some(self.coords.clone())
            } else {
                None
            },
            truncated: self.truncated_vertices().collect(),
        }
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let n = spec.vertices.len();
        let mut sorted = spec.vertices.clone();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(k, &v)| k != v) {
            return invalid("vertex ids must be the dense range 0..n");
        }
        let mut edges = vec![None; spec.edges.len()];
        for es in &spec.edges {
            if es.id >= edges.len() || edges[es.id].is_some() {
                return invalid(format!(
                    "edge ids must be the dense range 0..m (offending id {})",
                    es.id
                ));
            }
            edges[es.id] = Some(Edge {
                i: es.i,
                j: es.j,
                length: es.length,
            });
        }
        let edges = edges.into_iter().map(Option::unwrap).collect();
        let mut g = MetricGraph::new(n, edges, spec.u, spec.big_u)?;
        if let Some(c) = &spec.coords {
            if c.len() != n {
                return invalid("coords must list every vertex");
            }
            g.set_coords(c.clone());
        }
        let mut t = vec![false; n];
        for &v in &spec.truncated {
            if v >= n {
                return invalid(format!("truncated vertex {v} does not exist"));
            }
            t[v] = true;
        }
        g.set_truncated(t);
        Ok(g)
    }
}

/// JSON form of a graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeSpec>,
    pub u: f64,
    #[serde(rename = "U")]
    pub big_u: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Option<Vec<i64>>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub truncated: Vec<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: EdgeId,
    pub i: VertexId,
    pub j: VertexId,
    pub length: f64,
}

fn box_points(d: usize, extent: i64) -> Vec<Vec<i64>> {
    let mut pts = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::with_capacity(pts.len() * (2 * extent as usize + 1));
        for p in &pts {
            for x in -extent..=extent {
                let mut q = p.clone();
                q.push(x);
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}

/// The box [-extent, extent]^d of the Z^d lattice with uniform edge length.
pub fn build_lattice_graph(d: usize, extent: usize, edge_len: f64) -> Result<MetricGraph> {
    if !(1..=3).contains(&d) {
        return invalid(format!("lattice dimension {d} not in 1..=3"));
    }
    if extent < 1 {
        return invalid("extent must be at least 1");
    }
    if !(edge_len > 0.0 && edge_len.is_finite()) {
        return invalid(format!("edge length {edge_len} must be positive"));
    }
    let ext = extent as i64;
    let pts = box_points(d, ext);
    let index: HashMap<Vec<i64>, usize> = pts
        .iter()
        .cloned()
        .enumerate()
        .map(|(k, p)| (p, k))
        .collect();
    let mut edges = Vec::new();
    for (a, p) in pts.iter().enumerate() {
        for axis in 0..d {
            if p[axis] < ext {
                let mut q = p.clone();
                q[axis] += 1;
                edges.push(Edge {
                    i: a,
                    j: index[&q],
                    length: edge_len,
                });
            }
        }
    }
    let truncated = pts
        .iter()
        .map(|p| p.iter().any(|x| x.abs() == ext))
        .collect();
    let mut g = MetricGraph::new(pts.len(), edges, edge_len, edge_len)?;
    g.set_coords(pts.into_iter().map(Some).collect());
    g.set_truncated(truncated);
    Ok(g)
}

/// Metric Cayley graph of Z^d for the generators `(s, l(s))`, restricted to the
/// word ball of radius `extent` around the identity.
pub fn build_cayley_graph(generators: &[(Vec<i64>, f64)], extent: usize) -> Result<MetricGraph> {
    if generators.is_empty() {
        return invalid("empty generator set");
    }
    let d = generators[0].0.len();
    for (s, l) in generators {
        if s.len() != d || d == 0 {
            return invalid("generators must share a positive dimension");
        }
        if s.iter().all(|&x| x == 0) {
            return invalid("the identity is not a generator");
        }
        if !(*l > 0.0 && l.is_finite()) {
            return invalid(format!("generator length {l} must be positive"));
        }
    }
    // word metric BFS
    let origin = vec![0i64; d];
    let mut depth: HashMap<Vec<i64>, usize> = HashMap::from([(origin.clone(), 0)]);
    let mut queue = VecDeque::from([origin]);
    while let Some(g) = queue.pop_front() {
        let k = depth[&g];
        if k == extent {
            continue;
        }
        for (s, _) in generators {
            for sign in [1, -1] {
                let h: Vec<i64> = g.iter().zip(s).map(|(a, b)| a + sign * b).collect();
                if !depth.contains_key(&h) {
                    depth.insert(h.clone(), k + 1);
                    queue.push_back(h);
                }
            }
        }
    }
    let mut pts: Vec<Vec<i64>> = depth.keys().cloned().collect();
    pts.sort();
    let index: HashMap<Vec<i64>, usize> = pts
        .iter()
        .cloned()
        .enumerate()
        .map(|(k, p)| (p, k))
        .collect();
    let mut edges = Vec::new();
    for (a, p) in pts.iter().enumerate() {
        for (s, l) in generators {
            let q: Vec<i64> = p.iter().zip(s).map(|(x, y)| x + y).collect();
            if let Some(&b) = index.get(&q) {
                edges.push(Edge {
                    i: a,
                    j: b,
                    length: *l,
                });
            }
        }
    }
    let truncated = pts.iter().map(|p| depth[p] == extent).collect();
    let mut g = MetricGraph::from_edges(pts.len(), edges)?;
    g.set_coords(pts.into_iter().map(Some).collect());
    g.set_truncated(truncated);
    Ok(g)
}

/// Adds one edge from `v` to a new leaf vertex. Existing ids are unchanged; the
/// new edge gets id `n_edges` and the leaf id `n_vertices`.
pub fn append_pendant_edge(g: &MetricGraph, v: VertexId, length: f64) -> Result<MetricGraph> {
    if v >= g.n_vertices {
        return invalid(format!("vertex {v} does not exist"));
    }
    if !(length > 0.0 && length.is_finite()) {
        return invalid(format!("edge length {length} must be positive"));
    }
    let (mut u, mut big_u) = (g.u, g.big_u);
    if length < u || length > big_u {
        log::warn!("pendant edge length {length} outside [{u}, {big_u}]; widening the bounds");
        u = u.min(length);
        big_u = big_u.max(length);
    }
    let mut edges = g.edges.clone();
    let leaf = g.n_vertices;
    edges.push(Edge {
        i: v,
        j: leaf,
        length,
    });
    let mut h = MetricGraph::new(g.n_vertices + 1, edges, u, big_u)?;
    let mut coords = g.coords.clone();
    coords.push(None);
    h.set_coords(coords);
    let mut t = g.truncated.clone();
    t.push(false);
    h.set_truncated(t);
    Ok(h)
}

/// Attaches a path of `len` unit-ish edges of length `edge_len` at `v`
/// (a finite piece of a half-line).
pub fn attach_ray(g: &MetricGraph, v: VertexId, len: usize, edge_len: f64) -> Result<MetricGraph> {
    let mut h = g.clone();
    let mut at = v;
    for k in 0..len {
        h = append_pendant_edge(&h, at, edge_len)?;
        at = h.n_vertices - 1;
        if k + 1 == len {
            let mut t = h.truncated.clone();
            t[at] = true;
            h.set_truncated(t);
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_counts() {
        let g = build_lattice_graph(1, 10, 1.0).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (21, 20));
        let g = build_lattice_graph(2, 2, 1.0).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (25, 40));
        assert!(build_lattice_graph(1, 3, 0.0).is_err());
        assert!(build_lattice_graph(4, 3, 1.0).is_err());
    }

    #[test]
    fn lattice_degrees_and_truncation() {
        let g = build_lattice_graph(2, 3, 1.0).unwrap();
        let o = g.vertex_at(&[0, 0]).unwrap();
        assert_eq!(g.degree(o), 4);
        assert!(!g.is_truncated(o));
        let c = g.vertex_at(&[3, 3]).unwrap();
        assert_eq!(g.degree(c), 2);
        assert!(g.is_truncated(c));
    }

    #[test]
    fn cayley_line() {
        let g = build_cayley_graph(&[(vec![1], 1.0)], 5).unwrap();
        let l = build_lattice_graph(1, 5, 1.0).unwrap();
        assert_eq!(g.n_vertices(), l.n_vertices());
        assert_eq!(g.n_edges(), l.n_edges());
        assert!(build_cayley_graph(&[], 3).is_err());
        assert!(build_cayley_graph(&[(vec![1], 0.0)], 3).is_err());
    }

    #[test]
    fn cayley_shift() {
        let g = build_cayley_graph(&[(vec![1, 0], 1.0), (vec![0, 1], 2.0)], 4).unwrap();
        let a = g.vertex_at(&[0, 0]).unwrap();
        let b = g.vertex_at(&[0, 1]).unwrap();
        let e = g.find_edge(a, b, 2.0).unwrap();
        let f = g.shift_edge(e, &[1, -1]).unwrap();
        let ef = g.edge(f);
        assert_eq!(g.coords(ef.i).unwrap(), &[1, -1]);
        assert_eq!(g.coords(ef.j).unwrap(), &[1, 0]);
        assert_eq!(ef.length, 2.0);
        assert!(g.shift_edge(e, &[4, 0]).is_none());
    }

    #[test]
    fn pendant() {
        let g = build_lattice_graph(2, 2, 1.0).unwrap();
        let v = g.vertex_at(&[0, 0]).unwrap();
        let h = append_pendant_edge(&g, v, std::f64::consts::PI).unwrap();
        assert_eq!(h.n_edges(), g.n_edges() + 1);
        assert_eq!(h.degree(h.n_vertices() - 1), 1);
        assert_eq!(h.big_u(), std::f64::consts::PI);
        for e in 0..g.n_edges() {
            assert_eq!(g.edge(e), h.edge(e));
        }
        assert!(append_pendant_edge(&g, 99, 1.0).is_err());
    }

    #[test]
    fn disconnected_rejected() {
        let edges = vec![
            Edge {
                i: 0,
                j: 1,
                length: 1.0,
            },
            Edge {
                i: 2,
                j: 3,
                length: 1.0,
            },
        ];
        assert!(matches!(
            MetricGraph::from_edges(4, edges),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn loops_and_multi_edges() {
        let edges = vec![
            Edge {
                i: 0,
                j: 0,
                length: 1.0,
            },
            Edge {
                i: 0,
                j: 1,
                length: 1.5,
            },
            Edge {
                i: 0,
                j: 1,
                length: 2.0,
            },
        ];
        let g = MetricGraph::from_edges(2, edges).unwrap();
        assert_eq!(g.degree(0), 4);
        assert_eq!(g.degree(1), 2);
        assert_eq!(
            g.ends(0)[0],
            EdgeEnd {
                edge: 0,
                side: Side::Initial
            }
        );
        assert_eq!(
            g.ends(0)[1],
            EdgeEnd {
                edge: 0,
                side: Side::Terminal
            }
        );
    }

    #[test]
    fn spec_round_trip() {
        let g = build_lattice_graph(2, 2, 0.5).unwrap();
        let spec = g.to_spec();
        let text = serde_json::to_string(&spec).unwrap();
        let back: GraphSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let h = MetricGraph::from_spec(&back).unwrap();
        assert_eq!(h.n_edges(), g.n_edges());
        assert_eq!(h.vertex_at(&[1, -1]), g.vertex_at(&[1, -1]));
        assert!(text.contains("\"U\""));
    }
}
