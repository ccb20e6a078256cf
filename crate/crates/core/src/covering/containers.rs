use serde::{Deserialize, Serialize};

use super::packing::{fine_raster, mask, Packing, R_GEOM};
use crate::error::{Error, Result};
use crate::graph::{DistanceWorkspace, EdgeId, EdgeSet, MetricGraph, VertexId};

/// ℛ = {3r+2U, 63r/10+11U, 48r/5+41U/2}.
pub fn container_radii(r: f64, big_u: f64) -> [f64; 3] {
    [
        3.0 * r + 2.0 * big_u,
        6.3 * r + 11.0 * big_u,
        9.6 * r + 20.5 * big_u,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Container {
    pub center: VertexId,
    pub radius: f64,
    /// index into ℛ: 0 for a single bad ball, 1 and 2 after merges
    pub level: usize,
    /// bad centers whose r-balls it absorbs
    pub members: Vec<VertexId>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContainerSet {
    pub x: VertexId,
    pub big_r: f64,
    pub r: f64,
    pub containers: Vec<Container>,
    /// pairwise disjoint bad centers the containers grew from
    pub representatives: Vec<VertexId>,
    pub outside_proof_regime: bool,
}

impl ContainerSet {
    pub fn radius_sum(&self) -> f64 {
        self.containers.iter().map(|c| c.radius).sum()
    }

    pub fn edge_sets(&self, g: &MetricGraph) -> Vec<EdgeSet> {
        let mut ws = DistanceWorkspace::new(g);
        self.containers
            .iter()
            .map(|c| ws.ball(g, c.center, c.radius))
            .collect()
    }
}

/// Size of the largest pairwise disjoint subfamily, searched exactly but
/// stopping once `cap` is reached.
pub fn max_disjoint(balls: &[EdgeSet], cap: usize) -> usize {
    let n = balls.len();
    let conflict: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i != j && balls[i].intersects(&balls[j]))
                .collect()
        })
        .collect();
    fn go(k: usize, chosen: &mut Vec<usize>, conflict: &[Vec<bool>], cap: usize, best: &mut usize) {
        *best = (*best).max(chosen.len());
        if *best >= cap || chosen.len() + (conflict.len() - k) <= *best {
            return;
        }
        for i in k..conflict.len() {
            if chosen.iter().all(|&c| !conflict[c][i]) {
                chosen.push(i);
                go(i + 1, chosen, conflict, cap, best);
                chosen.pop();
                if *best >= cap {
                    return;
                }
            }
        }
    }
    let mut best = 0;
    go(0, &mut Vec::new(), &conflict, cap, &mut best);
    best
}

/// Containers for the bad raster balls Λ_r(b), b ∈ `bad`; needs r > 300U.
pub fn build_containers(
    g: &MetricGraph,
    x: VertexId,
    big_r: f64,
    r: f64,
    bad: &[VertexId],
) -> Result<ContainerSet> {
    if r <= R_GEOM * g.big_u() {
        return Err(Error::Geometry(format!(
            "containers need r > 300U = {}, got r = {r}",
            R_GEOM * g.big_u()
        )));
    }
    build_containers_desk(g, x, big_r, r, bad)
}

/// Same construction without the r > 300U requirement; every claimed property
/// is still verified and a failure is an error.
pub fn build_containers_desk(
    g: &MetricGraph,
    x: VertexId,
    big_r: f64,
    r: f64,
    bad: &[VertexId],
) -> Result<ContainerSet> {
    let raster = fine_raster(g, x, big_r, r)?;
    let mut bad: Vec<VertexId> = bad.to_vec();
    bad.sort_unstable();
    bad.dedup();
    if let Some(b) = bad.iter().find(|&&b| !raster.contains(b)) {
        return Err(Error::Invalid(format!(
            "bad center {b} is not a raster point"
        )));
    }
    let rho = container_radii(r, g.big_u());
    let mut ws = DistanceWorkspace::new(g);
    let mut balls = Vec::with_capacity(bad.len());
    for &b in &bad {
        g.check_ball_inside(b, r)?;
        balls.push(ws.ball(g, b, r));
    }
    let k = max_disjoint(&balls, 4);
    if k >= 4 {
        return Err(Error::TooManyBadBalls(k));
    }
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..bad.len() {
        if reps.iter().all(|&j| !balls[i].intersects(&balls[j])) {
            reps.push(i);
        }
    }
    let mut cont: Vec<(Container, EdgeSet)> = Vec::new();
    for &i in &reps {
        g.check_ball_inside(bad[i], rho[0])?;
        let set = ws.ball(g, bad[i], rho[0]);
        cont.push((
            Container {
                center: bad[i],
                radius: rho[0],
                level: 0,
                members: vec![],
            },
            set,
        ));
    }
    // bad balls meeting a representative lie in its first-stage container
    for (i, ball) in balls.iter().enumerate() {
        let host = reps
            .iter()
            .position(|&j| ball.intersects(&balls[j]))
            .ok_or_else(|| {
                Error::Geometry(format!("bad ball at {} meets no representative", bad[i]))
            })?;
        if !ball.is_subset(&cont[host].1) {
            return Err(Error::Geometry(format!(
                "bad ball at {} is not inside Λ_(3r+2U)({})",
                bad[i], bad[reps[host]]
            )));
        }
        cont[host].0.members.push(bad[i]);
    }
    while let Some((i, j)) = first_overlap(&cont) {
        let (cj, sj) = cont.remove(j);
        let (ci, si) = cont.remove(i);
        let level = ci.level + cj.level + 1;
        if level > 2 {
            return Err(Error::Geometry("merge hierarchy exhausted".into()));
        }
        let union = si.union(&sj);
        let center = merged_center(g, &raster, &si.intersection(&sj), &union, rho[level])?;
        let mut members = ci.members;
        members.extend(cj.members);
        members.sort_unstable();
        let set = ws.ball(g, center, rho[level]);
        cont.insert(
            i,
            (
                Container {
                    center,
                    radius: rho[level],
                    level,
                    members,
                },
                set,
            ),
        );
    }
    let out = ContainerSet {
        x,
        big_r,
        r,
        containers: cont.into_iter().map(|c| c.0).collect(),
        representatives: reps.iter().map(|&i| bad[i]).collect(),
        outside_proof_regime: r <= R_GEOM * g.big_u(),
    };
    if out.radius_sum() > rho[2] * (1.0 + 1e-12) {
        return Err(Error::Geometry(format!(
            "container radii sum to {} > {}",
            out.radius_sum(),
            rho[2]
        )));
    }
    Ok(out)
}

fn first_overlap(cont: &[(Container, EdgeSet)]) -> Option<(usize, usize)> {
    for i in 0..cont.len() {
        for j in i + 1..cont.len() {
            if cont[i].1.intersects(&cont[j].1) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Raster point closest to the overlap whose ball of radius `radius` holds
/// both merged containers.
fn merged_center(
    g: &MetricGraph,
    raster: &Packing,
    overlap: &EdgeSet,
    union: &EdgeSet,
    radius: f64,
) -> Result<VertexId> {
    let sources: Vec<_> = overlap.vertices(g).into_iter().map(|v| (v, 0.0)).collect();
    let mut ws = DistanceWorkspace::new(g);
    ws.run(g, &sources, f64::INFINITY);
    let mut cand: Vec<(f64, VertexId)> = raster.centers.iter().map(|&w| (ws.get(w), w)).collect();
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (_, w) in cand {
        if g.check_ball_inside(w, radius).is_err() {
            continue;
        }
        if union.is_subset(&ws.ball(g, w, radius)) {
            return Ok(w);
        }
    }
    Err(Error::Geometry(format!(
        "no raster point carries a container of radius {radius} around the merged pair"
    )))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryCover {
    pub centers: Vec<VertexId>,
    /// ∪ Λ_{r/3}(w) ⊇ Λout of the container
    pub covers: bool,
    /// no Λ_{r/3}(w) lies inside the container
    pub none_inside: bool,
    pub uncovered: Vec<EdgeId>,
    pub outside_proof_regime: bool,
}

/// Raster balls of radius r/3 that stick out of the container and together
/// cover its outer annulus; needs r > 300U.
pub fn boundary_cover(
    g: &MetricGraph,
    x: VertexId,
    big_r: f64,
    r: f64,
    container: Option<&Container>,
) -> Result<BoundaryCover> {
    if r <= R_GEOM * g.big_u() {
        return Err(Error::Geometry(format!(
            "boundary cover needs r > 300U = {}, got r = {r}",
            R_GEOM * g.big_u()
        )));
    }
    let bc = boundary_cover_desk(g, x, big_r, r, container)?;
    if !bc.covers {
        return Err(Error::Geometry(format!(
            "{} edges of the outer annulus stay uncovered",
            bc.uncovered.len()
        )));
    }
    Ok(bc)
}

/// Boundary cover without the radius requirement; the two properties are
/// reported rather than guaranteed.
pub fn boundary_cover_desk(
    g: &MetricGraph,
    x: VertexId,
    big_r: f64,
    r: f64,
    container: Option<&Container>,
) -> Result<BoundaryCover> {
    let outside_proof_regime = r <= R_GEOM * g.big_u();
    let Some(c) = container else {
        return Ok(BoundaryCover {
            centers: vec![],
            covers: true,
            none_inside: true,
            uncovered: vec![],
            outside_proof_regime,
        });
    };
    let raster = fine_raster(g, x, big_r, r)?;
    if !raster.contains(c.center) {
        return Err(Error::Geometry(format!(
            "container center {} is not a raster point",
            c.center
        )));
    }
    let mut ws = DistanceWorkspace::new(g);
    let cset = ws.ball(g, c.center, c.radius);
    if !cset.is_subset(&ws.ball(g, x, big_r)) {
        return Err(Error::Geometry("container leaves the outer ball".into()));
    }
    let (_, out) = g.interior_exterior(c.center, c.radius)?;
    let in_c = mask(g, &cset);
    let in_out = mask(g, &out);
    let dist = g.vertex_distances(c.center);
    let mut covered = vec![false; g.n_edges()];
    let mut centers = Vec::new();
    for &w in raster
        .centers
        .iter()
        .filter(|&&w| dist[w] <= c.radius + r / 3.0 + g.big_u())
    {
        let ball = ws.ball(g, w, r / 3.0);
        if ball.iter().all(|e| in_c[e]) || !ball.iter().any(|e| in_out[e]) {
            continue;
        }
        ball.iter().for_each(|e| covered[e] = true);
        centers.push(w);
    }
    let uncovered: Vec<EdgeId> = out.iter().filter(|&e| !covered[e]).collect();
    Ok(BoundaryCover {
        centers,
        covers: uncovered.is_empty(),
        none_inside: true,
        uncovered,
        outside_proof_regime,
    })
}
