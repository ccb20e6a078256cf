use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DistanceWorkspace, EdgeId, EdgeSet, MetricGraph, VertexId};

/// Smallest radius for which the raster balls Λ_{r/3} cover what the raster
/// of radius r/10 covers (3r/10 + 6U ≤ r/3).
pub const RASTER_COVER_MIN: f64 = 180.0;
/// r_geom / U: every covering statement holds above this.
pub const R_GEOM: f64 = 300.0;

/// A maximal family of vertices whose r-balls are pairwise disjoint and lie in
/// Λ_R(v0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Packing {
    pub center: VertexId,
    pub big_r: f64,
    pub r: f64,
    pub centers: Vec<VertexId>,
}

impl Packing {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.centers.contains(&v)
    }
}

pub(crate) fn mask(g: &MetricGraph, set: &EdgeSet) -> Vec<bool> {
    let mut m = vec![false; g.n_edges()];
    for e in set.iter() {
        m[e] = true;
    }
    m
}

/// Greedy packing, outermost candidates first (ties by vertex id). Taking the
/// boundary layer first is what makes a segment come out as the odd integers.
pub fn maximal_packing(g: &MetricGraph, v0: VertexId, big_r: f64, r: f64) -> Result<Packing> {
    if r < g.u() * (1.0 - 1e-12) {
        return Err(Error::RadiusTooSmall { r, u: g.u() });
    }
    if big_r < r {
        return Err(Error::Invalid(format!(
            "outer radius {big_r} is smaller than the packing radius {r}"
        )));
    }
    if v0 >= g.n_vertices() {
        return Err(Error::Invalid(format!("vertex {v0} does not exist")));
    }
    g.check_ball_inside(v0, big_r)?;
    let mut ws = DistanceWorkspace::new(g);
    let big = ws.ball(g, v0, big_r);
    let inside = mask(g, &big);
    let dist = g.vertex_distances(v0);
    let mut cand = big.vertices(g);
    cand.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(a.cmp(&b)));
    let mut used = vec![false; g.n_edges()];
    let mut centers = Vec::new();
    for v in cand {
        let ball = ws.ball(g, v, r);
        if ball.iter().all(|e| inside[e] && !used[e]) {
            ball.iter().for_each(|e| used[e] = true);
            centers.push(v);
        }
    }
    centers.sort_unstable();
    Ok(Packing {
        center: v0,
        big_r,
        r,
        centers,
    })
}

/// Raster V_{R, r/10}(x).
pub fn fine_raster(g: &MetricGraph, x: VertexId, big_r: f64, r: f64) -> Result<Packing> {
    maximal_packing(g, x, big_r, r / 10.0)
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PackingCheck {
    pub disjoint: bool,
    pub inside: bool,
    pub maximal: bool,
    /// vertices whose ball could still be added
    pub augmentable: Vec<VertexId>,
}

impl PackingCheck {
    pub fn ok(&self) -> bool {
        self.disjoint && self.inside && self.maximal
    }
}

/// Recomputes both packing conditions and tries to add every vertex of the
/// big ball, one at a time.
pub fn verify_packing(g: &MetricGraph, p: &Packing) -> PackingCheck {
    let mut ws = DistanceWorkspace::new(g);
    let big = ws.ball(g, p.center, p.big_r);
    let inside_mask = mask(g, &big);
    let mut owner: Vec<Option<VertexId>> = vec![None; g.n_edges()];
    let mut check = PackingCheck {
        disjoint: true,
        inside: true,
        maximal: true,
        augmentable: vec![],
    };
    for &c in &p.centers {
        for e in ws.ball(g, c, p.r).iter() {
            check.inside &= inside_mask[e];
            if owner[e].is_some() {
                check.disjoint = false;
            }
            owner[e] = Some(c);
        }
    }
    for v in big.vertices(g) {
        if p.contains(v) {
            continue;
        }
        let ball = ws.ball(g, v, p.r);
        if ball.iter().all(|e| inside_mask[e] && owner[e].is_none()) {
            check.augmentable.push(v);
        }
    }
    check.maximal = check.augmentable.is_empty();
    check
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoveringCheck {
    pub ok: bool,
    pub uncovered: Vec<EdgeId>,
}

/// Checks ∪_{v} Λ_{3r+5U}(v) ⊇ Λ_R(v0) edge by edge.
pub fn verify_covering(
    g: &MetricGraph,
    v0: VertexId,
    big_r: f64,
    r: f64,
    p: &Packing,
) -> CoveringCheck {
    let rho = 3.0 * r + 5.0 * g.big_u();
    let mut ws = DistanceWorkspace::new(g);
    let mut covered = vec![false; g.n_edges()];
    for &c in &p.centers {
        ws.ball(g, c, rho).iter().for_each(|e| covered[e] = true);
    }
    let uncovered: Vec<EdgeId> = ws
        .ball(g, v0, big_r)
        .iter()
        .filter(|&e| !covered[e])
        .collect();
    CoveringCheck {
        ok: uncovered.is_empty(),
        uncovered,
    }
}

/// (R / (c_P (3r+5U)^d), c_P R^d / r).
pub fn cardinality_bounds(big_r: f64, r: f64, big_u: f64, c_p: f64, d: f64) -> (f64, f64) {
    (
        big_r / (c_p * (3.0 * r + 5.0 * big_u).powf(d)),
        c_p * big_r.powf(d) / r,
    )
}

/// Raster balls Λ_{r/3}(v_i) with dist(v, v_i) ≤ s + r/3 cover Λ_s(v).
/// `raster` must be V_{R, r/10}(x) and Λ_s(v) ⊆ Λ_R(x).
pub fn raster_cover_check(
    g: &MetricGraph,
    raster: &Packing,
    v: VertexId,
    s: f64,
    r: f64,
) -> Result<CoveringCheck> {
    if !raster.contains(v) {
        return Err(Error::Geometry(format!("vertex {v} is not a raster point")));
    }
    let mut ws = DistanceWorkspace::new(g);
    let target = ws.ball(g, v, s);
    if !target.is_subset(&ws.ball(g, raster.center, raster.big_r)) {
        return Err(Error::Geometry(format!(
            "ball of radius {s} around {v} leaves the outer ball"
        )));
    }
    let dist = g.vertex_distances(v);
    let mut covered = vec![false; g.n_edges()];
    for &w in raster.centers.iter().filter(|&&w| dist[w] <= s + r / 3.0) {
        ws.ball(g, w, r / 3.0)
            .iter()
            .for_each(|e| covered[e] = true);
    }
    let uncovered: Vec<EdgeId> = target.iter().filter(|&e| !covered[e]).collect();
    Ok(CoveringCheck {
        ok: uncovered.is_empty(),
        uncovered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_lattice_graph;

    #[test]
    fn segment_gives_odd_integers() {
        let g = build_lattice_graph(1, 15, 1.0).unwrap();
        let o = g.vertex_at(&[0]).unwrap();
        let p = maximal_packing(&g, o, 10.0, 1.0).unwrap();
        let mut xs: Vec<i64> = p.centers.iter().map(|&v| g.coords(v).unwrap()[0]).collect();
        xs.sort();
        assert_eq!(xs, vec![-9, -7, -5, -3, -1, 1, 3, 5, 7, 9]);
        assert!(verify_packing(&g, &p).ok());
        // same answer through the raster at r = 10
        assert_eq!(fine_raster(&g, o, 10.0, 10.0).unwrap().len(), 10);
        assert!(matches!(
            fine_raster(&g, o, 10.0, 5.0),
            Err(Error::RadiusTooSmall { .. })
        ));
    }

    #[test]
    fn segment_max_packing_by_enumeration() {
        // every maximal packing of 20 unit edges by 2-edge balls: brute force the largest
        let g = build_lattice_graph(1, 15, 1.0).unwrap();
        let o = g.vertex_at(&[0]).unwrap();
        let cand: Vec<i64> = (-9..=9).collect();
        let mut best = 0;
        for mask in 0u32..(1 << cand.len()) {
            let chosen: Vec<i64> = (0..cand.len())
                .filter(|k| mask >> k & 1 == 1)
                .map(|k| cand[k])
                .collect();
            if chosen.windows(2).all(|w| w[1] - w[0] >= 2) {
                best = best.max(chosen.len());
            }
        }
        assert_eq!(best, maximal_packing(&g, o, 10.0, 1.0).unwrap().len());
    }

    #[test]
    fn trivial_packing_is_center() {
        let g = build_lattice_graph(2, 6, 1.0).unwrap();
        let o = g.vertex_at(&[0, 0]).unwrap();
        let p = maximal_packing(&g, o, 2.0, 2.0).unwrap();
        assert_eq!(p.centers, vec![o]);
        assert!(verify_covering(&g, o, 2.0, 2.0, &p).ok);
    }

    #[test]
    fn boundary_is_rejected() {
        let g = build_lattice_graph(2, 6, 1.0).unwrap();
        let v = g.vertex_at(&[4, 0]).unwrap();
        assert!(matches!(
            maximal_packing(&g, v, 3.0, 1.0),
            Err(Error::TouchesBoundary { .. })
        ));
    }

    #[test]
    fn lattice_covering_and_sabotage() {
        let g = build_lattice_graph(2, 34, 1.0).unwrap();
        let o = g.vertex_at(&[0, 0]).unwrap();
        let mut p = maximal_packing(&g, o, 30.0, 3.0).unwrap();
        assert!(verify_packing(&g, &p).ok());
        assert!(verify_covering(&g, o, 30.0, 3.0, &p).ok);
        // remove every center near the origin: the 14-balls of the rest miss it
        let dist = g.vertex_distances(o);
        p.centers.retain(|&c| dist[c] >= 16.0);
        let chk = verify_covering(&g, o, 30.0, 3.0, &p);
        assert!(!chk.ok && !chk.uncovered.is_empty());
        assert!(!verify_packing(&g, &p).maximal);
    }

    #[test]
    fn raster_cover_remark() {
        let g = build_lattice_graph(1, 500, 1.0).unwrap();
        let o = g.vertex_at(&[0]).unwrap();
        let raster = fine_raster(&g, o, 450.0, 200.0).unwrap();
        let v = *raster
            .centers
            .iter()
            .find(|&&c| g.coords(c).unwrap()[0].abs() < 60)
            .unwrap();
        let chk = raster_cover_check(&g, &raster, v, 150.0, 200.0).unwrap();
        assert!(chk.ok, "{:?}", chk.uncovered);
    }
}
