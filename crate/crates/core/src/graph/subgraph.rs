use std::sync::Arc;

use super::{EdgeId, MetricGraph, VertexId};

/// A set of edge ids, kept sorted and duplicate-free.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EdgeSet(Vec<EdgeId>);

impl EdgeSet {
    pub fn from_vec(mut v: Vec<EdgeId>) -> Self {
        v.sort_unstable();
        v.dedup();
        EdgeSet(v)
    }

    pub fn all(g: &MetricGraph) -> Self {
        EdgeSet((0..g.n_edges()).collect())
    }

    pub fn as_slice(&self) -> &[EdgeId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    /// Position of `e` inside the set, if present.
    pub fn index_of(&self, e: EdgeId) -> Option<usize> {
        self.0.binary_search(&e).ok()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        let mut it = other.0.iter().peekable();
        'outer: for &e in &self.0 {
            while let Some(&&f) = it.peek() {
                if f == e {
                    it.next();
                    continue 'outer;
                }
                if f > e {
                    return false;
                }
                it.next();
            }
            return false;
        }
        true
    }

    pub fn intersects(&self, other: &EdgeSet) -> bool {
        let (mut a, mut b) = (0, 0);
        while a < self.0.len() && b < other.0.len() {
            match self.0[a].cmp(&other.0[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn difference(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet(
            self.0
                .iter()
                .copied()
                .filter(|&e| !other.contains(e))
                .collect(),
        )
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        EdgeSet::from_vec(v)
    }

    pub fn intersection(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet(
            self.0
                .iter()
                .copied()
                .filter(|&e| other.contains(e))
                .collect(),
        )
    }

    /// V_E: all endpoints of edges in the set, sorted.
    pub fn vertices(&self, g: &MetricGraph) -> Vec<VertexId> {
        let mut v: Vec<VertexId> = self
            .0
            .iter()
            .flat_map(|&e| [g.edge(e).i, g.edge(e).j])
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Sum of the edge lengths.
    pub fn volume(&self, g: &MetricGraph) -> f64 {
        self.0.iter().map(|&e| g.length(e)).sum()
    }
}

impl FromIterator<EdgeId> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = EdgeId>>(iter: I) -> Self {
        EdgeSet::from_vec(iter.into_iter().collect())
    }
}

/// The subgraph Γ_{E1} induced by an edge set, with its vertices split into
/// inner ones (all parent edges inside E1) and boundary ones.
#[derive(Clone, Debug)]
pub struct InducedSubgraph {
    parent: Arc<MetricGraph>,
    edges: EdgeSet,
    inner: Vec<VertexId>,
    boundary: Vec<VertexId>,
}

impl InducedSubgraph {
    pub fn new(parent: Arc<MetricGraph>, edges: EdgeSet) -> Self {
        let (mut inner, mut boundary) = (Vec::new(), Vec::new());
        for v in edges.vertices(&parent) {
            if parent.ends(v).iter().all(|end| edges.contains(end.edge)) {
                inner.push(v);
            } else {
                boundary.push(v);
            }
        }
        InducedSubgraph {
            parent,
            edges,
            inner,
            boundary,
        }
    }

    /// The whole graph as its own subgraph (no boundary vertices).
    pub fn full(parent: Arc<MetricGraph>) -> Self {
        let edges = EdgeSet::all(&parent);
        Self::new(parent, edges)
    }

    pub fn parent(&self) -> &Arc<MetricGraph> {
        &self.parent
    }

    pub fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    pub fn inner(&self) -> &[VertexId] {
        &self.inner
    }

    pub fn boundary(&self) -> &[VertexId] {
        &self.boundary
    }

    pub fn is_inner(&self, v: VertexId) -> bool {
        self.inner.binary_search(&v).is_ok()
    }

    pub fn volume(&self) -> f64 {
        self.edges.volume(&self.parent)
    }
}
