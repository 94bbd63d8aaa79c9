//! Local quadratic fits in chart coordinates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{ManifoldKind, SampleCloud};
use crate::neighborhoods::sorted_svd;

/// Derivatives of a sampled function at one point, in a frame whose first
/// axis is the inward normal of the nearest boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessianEstimate {
    pub point: usize,
    /// Rows are the frame axes in chart coordinates.
    pub frame: Vec<Vec<f64>>,
    pub gradient: Vec<f64>,
    /// m × m, row major.
    pub hessian: Vec<Vec<f64>>,
    /// Bound on the error of each Hessian entry: three standard errors of
    /// the fit plus a rounding floor.
    pub fit_residual: f64,
    pub support: usize,
}

impl HessianEstimate {
    pub fn h(&self, a: usize, b: usize) -> f64 {
        self.hessian[a][b]
    }

    pub fn laplacian(&self) -> f64 {
        (0..self.hessian.len()).map(|a| self.hessian[a][a]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.hessian.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Chart displacement `u_j - u_i`, wrapped on the circle.
pub(crate) fn chart_offset(cloud: &SampleCloud, i: usize, j: usize) -> Vec<f64> {
    let m = cloud.intrinsic_dim();
    let mut d: Vec<f64> = (0..m).map(|a| cloud.intrinsic[(j, a)] - cloud.intrinsic[(i, a)]).collect();
    if cloud.spec.kind == ManifoldKind::Circle {
        let period = 2.0 * std::f64::consts::PI * cloud.spec.params["radius"];
        d[0] -= period * (d[0] / period).round();
    }
    d
}

/// Orthonormal chart frame at point `i`: the inward normal first, then its
/// rotation by a right angle. Boundaryless manifolds use the chart axes.
pub fn adapted_frame(cloud: &SampleCloud, i: usize) -> Vec<Vec<f64>> {
    let m = cloud.intrinsic_dim();
    let u = cloud.chart(i);
    match cloud.spec.inward_normal(&u) {
        Some(n) if m == 1 => vec![n],
        Some(n) => vec![n.clone(), vec![-n[1], n[0]]],
        None => (0..m).map(|a| (0..m).map(|b| if a == b { 1.0 } else { 0.0 }).collect()).collect(),
    }
}

/// Fits `f` by a quadratic over the points within chart distance `bandwidth`
/// of `point` and reads off gradient and Hessian in the adapted frame.
pub fn estimate_hessian(cloud: &SampleCloud, f: &[f64], point: usize, bandwidth: f64) -> Result<HessianEstimate> {
    let frame = adapted_frame(cloud, point);
    estimate_in_frame(cloud, f, point, bandwidth, frame)
}

pub(crate) fn estimate_in_frame(
    cloud: &SampleCloud,
    f: &[f64],
    point: usize,
    bandwidth: f64,
    frame: Vec<Vec<f64>>,
) -> Result<HessianEstimate> {
    let n = cloud.len();
    if f.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.len() });
    }
    let m = cloud.intrinsic_dim();
    let q = m * (m + 1) / 2;
    let cols = 1 + m + q;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut resp = Vec::new();
    for j in 0..n {
        let d = chart_offset(cloud, point, j);
        if d.iter().map(|v| v * v).sum::<f64>() > bandwidth * bandwidth {
            continue;
        }
        let z: Vec<f64> = frame.iter().map(|ax| ax.iter().zip(&d).map(|(a, b)| a * b).sum()).collect();
        let mut row = Vec::with_capacity(cols);
        row.push(1.0);
        // scaled by the bandwidth for conditioning
        row.extend(z.iter().map(|v| v / bandwidth));
        for a in 0..m {
            for b in a..m {
                row.push(z[a] * z[b] / (bandwidth * bandwidth));
            }
        }
        rows.push(row);
        resp.push(f[j]);
    }
    let k = rows.len();
    if k < cols + 1 {
        return Err(Error::Estimation { index: point, reason: format!("{k} points within the bandwidth, need {}", cols + 1) });
    }
    let design = DMatrix::from_fn(k, cols, |r, c| rows[r][c]);
    let y = DVector::from_vec(resp);
    let (u, s, vt) = sorted_svd(design);
    if s[cols - 1] <= 1e-10 * s[0] {
        return Err(Error::Estimation { index: point, reason: "singular quadratic design".into() });
    }
    let v = vt.transpose();
    let uty = u.transpose() * &y;
    let coef = &v * DVector::from_fn(cols, |j, _| uty[j] / s[j]);
    let fitted = &u * &uty;
    let rss = (&y - fitted).norm_squared();
    let sigma2 = rss / (k - cols) as f64;
    // coefficient variances: diag(V Σ⁻² Vᵀ) σ²
    let var = |c: usize| (0..cols).map(|j| (v[(c, j)] / s[j]).powi(2)).sum::<f64>() * sigma2;

    let h2 = bandwidth * bandwidth;
    let gradient: Vec<f64> = (0..m).map(|a| coef[1 + a] / bandwidth).collect();
    let mut hessian = vec![vec![0.0; m]; m];
    let mut worst_se = 0.0f64;
    let mut c = 1 + m;
    for a in 0..m {
        for b in a..m {
            let factor = if a == b { 2.0 } else { 1.0 } / h2;
            hessian[a][b] = factor * coef[c];
            hessian[b][a] = hessian[a][b];
            worst_se = worst_se.max(factor * var(c).sqrt());
            c += 1;
        }
    }
    let fmax = y.amax();
    let floor = 1e-9 * fmax.max(f64::MIN_POSITIVE) / h2;
    Ok(HessianEstimate { point, frame, gradient, hessian, fit_residual: 3.0 * worst_se + floor, support: k })
}
