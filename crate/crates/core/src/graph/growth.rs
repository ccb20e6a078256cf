use serde::{Deserialize, Serialize};

use super::{DistanceWorkspace, MetricGraph, VertexId};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthSample {
    pub center: VertexId,
    pub r: f64,
    pub volume: f64,
}

/// Fitted growth degree d and the smallest c_P with vol(Λ_r(v)) <= c_P r^d
/// on every sample.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub c_p: f64,
    pub d: f64,
    pub samples: Vec<GrowthSample>,
}

impl GrowthEstimate {
    pub fn bound(&self, r: f64) -> f64 {
        self.c_p * r.powf(self.d)
    }
}

pub fn estimate_growth(
    g: &MetricGraph,
    centers: &[VertexId],
    radii: &[f64],
) -> Result<GrowthEstimate> {
    let mut distinct: Vec<f64> = radii.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return invalid("at least two distinct radii are needed to identify a growth degree");
    }
    if centers.is_empty() {
        return invalid("no centers given");
    }
    if let Some(&r) = radii.iter().find(|&&r| r < g.u()) {
        return Err(Error::RadiusTooSmall { r, u: g.u() });
    }
    let mut ws = DistanceWorkspace::new(g);
    let mut samples = Vec::with_capacity(centers.len() * radii.len());
    for &c in centers {
        for &r in radii {
            g.check_ball_inside(c, r)?;
            samples.push(GrowthSample {
                center: c,
                r,
                volume: ws.ball(g, c, r).volume(g),
            });
        }
    }
    // least squares on (log r, log vol)
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.r.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.volume.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let d = sxy / sxx;
    let c_p = samples
        .iter()
        .map(|s| s.volume / s.r.powf(d))
        .fold(0.0, f64::max);
    Ok(GrowthEstimate { c_p, d, samples })
}
