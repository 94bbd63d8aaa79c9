//! Rate at which the smoother residual `(I - S)f` vanishes as `h → 0`.

use serde::{Deserialize, Serialize};

use super::{log_log_slope, Provenance};
use crate::error::{Error, Result};
use crate::manifold::SampleCloud;
use crate::neighborhoods::{build_graph, NeighborhoodMode};
use crate::operators::{build_operator, Method, OperatorParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "fit")]
pub enum ScalingFit {
    /// Slope of `ln max|(I - S)f|` against `ln h`.
    Fitted { exponent: f64 },
    /// Every residual is at rounding level: `f` lies in the smoother's null space.
    ExactNullSpace,
}

impl ScalingFit {
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            ScalingFit::Fitted { exponent } => Some(exponent),
            ScalingFit::ExactNullSpace => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub method: Method,
    pub hs: Vec<f64>,
    /// `max |(I - S)f|` over points farther than `interior_margin` from the boundary.
    pub interior_max: Vec<f64>,
    pub interior_margin: f64,
    /// `max |(I - S)f|` over points within `h` of the boundary.
    pub boundary_max: Option<Vec<f64>>,
    pub interior: ScalingFit,
    pub boundary: Option<ScalingFit>,
    pub provenance: Vec<Provenance>,
}

/// Residuals below this multiple of `max|f|` are rounding noise.
const NOISE_FLOOR: f64 = 1e-10;

fn fit(hs: &[f64], r: &[f64], scale: f64) -> Result<ScalingFit> {
    let noisy = r.iter().filter(|&&v| v <= NOISE_FLOOR * scale).count();
    if noisy == r.len() {
        Ok(ScalingFit::ExactNullSpace)
    } else if noisy > 0 {
        Err(Error::Inconclusive(format!("some residuals are at the noise floor: {r:?}")))
    } else {
        Ok(ScalingFit::Fitted { exponent: log_log_slope(hs, r) })
    }
}

/// Fits the decay exponent of the smoother residual of `f` in the interior
/// and at the boundary, over clouds paired with decreasing bandwidths.
pub fn interior_bias_scaling<F>(ladder: &[(SampleCloud, f64)], method: Method, f: F) -> Result<ScalingReport>
where
    F: Fn(&[f64]) -> f64,
{
    if ladder.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 bandwidths, got {}", ladder.len())));
    }
    if ladder.windows(2).any(|w| !(w[1].1 < w[0].1)) {
        return Err(Error::InvalidArgument("bandwidths must be strictly decreasing".into()));
    }
    let margin = 2.0 * ladder[0].1;
    let has_boundary = ladder[0].0.spec.has_boundary();
    let mut interior_max = Vec::new();
    let mut boundary_max = Vec::new();
    let mut scale = 0.0f64;
    let mut provenance = Vec::new();
    for (cloud, h) in ladder {
        let graph = build_graph(cloud, NeighborhoodMode::HBall { h: *h })?;
        let op = build_operator(method, cloud, &graph, &OperatorParams::new(cloud.intrinsic_dim()))?;
        let fv = cloud.eval(&f);
        scale = scale.max(fv.iter().fold(0.0, |a, v| a.max(v.abs())));
        let r = op
            .residual(&fv)?
            .ok_or_else(|| Error::InvalidArgument(format!("{method} has no smoother")))?;
        let interior = cloud.interior(margin);
        if interior.is_empty() {
            return Err(Error::InvalidArgument(format!("no points farther than {margin} from the boundary")));
        }
        interior_max.push(interior.iter().map(|&i| r[i].abs()).fold(0.0, f64::max));
        if has_boundary {
            let near = (0..cloud.len()).filter(|&i| cloud.boundary_dist[i].is_some_and(|d| d <= *h));
            boundary_max.push(near.map(|i| r[i].abs()).fold(0.0, f64::max));
        }
        provenance.push(Provenance::of(cloud, *h, &[method]));
    }
    let hs: Vec<f64> = ladder.iter().map(|r| r.1).collect();
    let interior = fit(&hs, &interior_max, scale)?;
    let boundary = if has_boundary { Some(fit(&hs, &boundary_max, scale)?) } else { None };
    Ok(ScalingReport {
        method,
        hs,
        interior_max,
        interior_margin: margin,
        boundary_max: has_boundary.then_some(boundary_max),
        interior,
        boundary,
        provenance,
    })
}
