use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{EdgeSet, GraphPoint, MetricGraph, VertexId};
use crate::error::{Error, Result};

/// Relative slack for "distance < r" tests; keeps float path sums that equal r
/// mathematically from sneaking into a ball.
pub const DIST_EPS: f64 = 1e-9;

fn below(d: f64, r: f64) -> bool {
    d < r - DIST_EPS * r.abs().max(1.0)
}

#[derive(PartialEq)]
struct Item(f64, VertexId);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then vertex id
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable Dijkstra state for repeated bounded searches on one graph.
pub struct DistanceWorkspace {
    dist: Vec<f64>,
    touched: Vec<VertexId>,
    heap: BinaryHeap<Item>,
}

impl DistanceWorkspace {
    pub fn new(g: &MetricGraph) -> Self {
        DistanceWorkspace {
            dist: vec![f64::INFINITY; g.n_vertices()],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    /// Shortest-path distances from the weighted sources. Vertices with
    /// distance <= `limit` get exact values; the rest read as > `limit`.
    pub fn run(&mut self, g: &MetricGraph, sources: &[(VertexId, f64)], limit: f64) {
        for &v in &self.touched {
            self.dist[v] = f64::INFINITY;
        }
        self.touched.clear();
        self.heap.clear();
        for &(v, d) in sources {
            if d < self.dist[v] {
                if self.dist[v].is_infinite() {
                    self.touched.push(v);
                }
                self.dist[v] = d;
                self.heap.push(Item(d, v));
            }
        }
        while let Some(Item(d, v)) = self.heap.pop() {
            if d > self.dist[v] {
                continue;
            }
            if d > limit {
                break;
            }
            for end in g.ends(v) {
                let w = g.opposite(end);
                let nd = d + g.length(end.edge);
                if nd < self.dist[w] {
                    if self.dist[w].is_infinite() {
                        self.touched.push(w);
                    }
                    self.dist[w] = nd;
                    self.heap.push(Item(nd, w));
                }
            }
        }
    }

    pub fn get(&self, v: VertexId) -> f64 {
        self.dist[v]
    }

    /// Vertices with a finite tentative distance (superset of the ones within the limit).
    pub fn reached(&self) -> &[VertexId] {
        &self.touched
    }

    /// E(v0, r) = edges with an interior point at distance <= r, i.e. edges
    /// with an endpoint strictly closer than r. No check on r >= u.
    pub fn ball(&mut self, g: &MetricGraph, v0: VertexId, r: f64) -> EdgeSet {
        self.run(g, &[(v0, 0.0)], r);
        let mut edges = Vec::new();
        for &v in &self.touched {
            if below(self.dist[v], r) {
                edges.extend(g.ends(v).iter().map(|e| e.edge));
            }
        }
        EdgeSet::from_vec(edges)
    }
}

fn sources_of(g: &MetricGraph, x: &GraphPoint) -> Vec<(VertexId, f64)> {
    match *x {
        GraphPoint::Vertex(v) => vec![(v, 0.0)],
        GraphPoint::Interior { edge, t } => {
            let e = g.edge(edge);
            vec![(e.i, t), (e.j, e.length - t)]
        }
    }
}

impl MetricGraph {
    /// Path-metric distance between two points.
    pub fn point_distance(&self, x: &GraphPoint, y: &GraphPoint) -> f64 {
        let mut ws = DistanceWorkspace::new(self);
        ws.run(self, &sources_of(self, x), f64::INFINITY);
        let mut best = match *y {
            GraphPoint::Vertex(v) => ws.get(v),
            GraphPoint::Interior { edge, t } => {
                let e = self.edge(edge);
                (ws.get(e.i) + t).min(ws.get(e.j) + e.length - t)
            }
        };
        if let (GraphPoint::Interior { edge: a, t: s }, GraphPoint::Interior { edge: b, t }) =
            (*x, *y)
        {
            if a == b {
                best = best.min((s - t).abs());
            }
        }
        best
    }

    /// Distance from a vertex to every vertex.
    pub fn vertex_distances(&self, v0: VertexId) -> Vec<f64> {
        let mut ws = DistanceWorkspace::new(self);
        ws.run(self, &[(v0, 0.0)], f64::INFINITY);
        (0..self.n_vertices()).map(|v| ws.get(v)).collect()
    }

    /// Distance from v0 to the point (e, t), including the endpoints t = 0, l.
    pub fn distance_on_edge(dist: &[f64], g: &MetricGraph, e: usize, t: f64) -> f64 {
        let edge = g.edge(e);
        (dist[edge.i] + t).min(dist[edge.j] + edge.length - t)
    }

    /// Edge set of the closed ball B_r(v0); requires r >= u.
    pub fn ball_edge_set(&self, v0: VertexId, r: f64) -> Result<EdgeSet> {
        if r < self.u() * (1.0 - 1e-12) {
            return Err(Error::RadiusTooSmall { r, u: self.u() });
        }
        Ok(DistanceWorkspace::new(self).ball(self, v0, r))
    }

    /// Errors unless the ball of radius r around v0 is the same as in the
    /// infinite graph this finite box stands for.
    pub fn check_ball_inside(&self, v0: VertexId, r: f64) -> Result<()> {
        let mut ws = DistanceWorkspace::new(self);
        ws.run(self, &[(v0, 0.0)], r);
        if self.truncated_vertices().any(|w| below(ws.get(w), r)) {
            return Err(Error::TouchesBoundary {
                center: v0,
                radius: r,
            });
        }
        Ok(())
    }

    /// (Λint_r(v), Λout_r(v)) = (E(v, r/3), E(v, r) \ E(v, r - 3U)).
    pub fn interior_exterior(&self, v: VertexId, r: f64) -> Result<(EdgeSet, EdgeSet)> {
        let limit = 6.0 * self.big_u();
        if r < limit {
            return Err(Error::RegionsOverlap { r, limit });
        }
        let mut ws = DistanceWorkspace::new(self);
        let inner = ws.ball(self, v, r / 3.0);
        let outer = ws
            .ball(self, v, r)
            .difference(&ws.ball(self, v, r - 3.0 * self.big_u()));
        Ok((inner, outer))
    }

    /// Distance between the closures of two edge sets (0 if they share a point).
    pub fn set_distance(&self, a: &EdgeSet, b: &EdgeSet) -> f64 {
        if a.is_empty() || b.is_empty() {
            return f64::INFINITY;
        }
        let sources: Vec<_> = a.vertices(self).into_iter().map(|v| (v, 0.0)).collect();
        let mut ws = DistanceWorkspace::new(self);
        ws.run(self, &sources, f64::INFINITY);
        b.vertices(self)
            .into_iter()
            .map(|v| ws.get(v))
            .fold(f64::INFINITY, f64::min)
    }
}
