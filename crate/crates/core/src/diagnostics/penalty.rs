//! Smoothness penalties `fᵀLf`, rescaled to estimate `∫‖∇f‖²`.

use serde::{Deserialize, Serialize};

use super::quadrature::quad;
use super::Provenance;
use crate::error::{Error, Result};
use crate::manifold::{ManifoldKind, SampleCloud};
use crate::neighborhoods::{build_graph, NeighborhoodMode};
use crate::operators::{build_operator, BiasOperator, Kernel, Method, OperatorParams};

/// Surface area of the unit sphere in `R^m`.
fn sphere_area(m: usize) -> f64 {
    // Γ(m/2) by recurrence from Γ(1/2) and Γ(1)
    let (mut g, mut x) = if m % 2 == 0 { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while x + 0.5 < m as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(m as f64 / 2.0) / g
}

/// Zeroth and second moments `(μ₀, μ₂)` of the kernel truncated to the ball
/// of radius `radius` in `R^m`, with `μ₂ = ∫ K(z) z₁² dz`.
pub fn ball_moments(m: usize, radius: f64, kernel: Kernel) -> Result<(f64, f64)> {
    if m == 0 || !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("need m >= 1 and radius > 0, got m = {m}, radius = {radius}")));
    }
    let k = |r: f64| match kernel {
        Kernel::Gaussian { width } => (-r * r / (width * width)).exp(),
        Kernel::Constant => 1.0,
    };
    let s = sphere_area(m);
    let mu0 = s * quad(|r| k(r) * r.powi(m as i32 - 1), 0.0, radius)?;
    let mu2 = s / m as f64 * quad(|r| k(r) * r.powi(m as i32 + 1), 0.0, radius)?;
    Ok((mu0, mu2))
}

/// `fᵀLf` divided by its leading-order expectation, so that it estimates
/// `∫‖∇f‖²` for Laplacian-type methods and `∫‖Hf‖²` for HLLE. Assumes an
/// h-ball graph of the given radius on a uniform sample.
pub fn scaled_penalty(op: &BiasOperator, cloud: &SampleCloud, radius: f64, f: &[f64]) -> Result<f64> {
    let n = cloud.len() as f64;
    let m = cloud.intrinsic_dim();
    let vol = cloud.spec.volume()?;
    let p = 1.0 / vol;
    let q = op.quadratic_form(f)?;
    let mf = m as f64;
    let scale = match op.method {
        Method::LaplacianEigenmaps => {
            let kernel = op.kernel.unwrap_or(Kernel::Gaussian { width: op.h });
            let (_, mu2) = ball_moments(m, radius, kernel)?;
            0.5 * n * n * p * p * mu2
        }
        Method::DiffusionMaps => {
            let kernel = op.kernel.unwrap_or(Kernel::Gaussian { width: op.h });
            let (mu0, mu2) = ball_moments(m, radius, kernel)?;
            // the self weight adds one to every degree
            n * n * p * mu2 / (2.0 * (n * p * mu0 + 1.0))
        }
        Method::LlrLaplacian => n * p * radius * radius / (2.0 * (mf + 2.0)),
        Method::CoefficientLaplacian => n * p,
        Method::Hlle => {
            let k = n * p * sphere_area(m) * radius.powi(m as i32) / mf;
            n * p * k * radius.powi(4) / (2.0 * (mf + 2.0) * (mf + 4.0))
        }
        other => {
            return Err(Error::InvalidArgument(format!("no penalty scaling for {other}")));
        }
    };
    Ok(q / scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyFamily {
    /// `cos(kπ(x + 1)/2)`, `k = 1..5`.
    Cosine,
    /// `sign(x)|x|^{(i+1)/3}`, `i = 1..5`.
    SignedPower,
}

impl PenaltyFamily {
    pub const SIZE: usize = 5;

    pub fn label(self, j: usize) -> String {
        match self {
            PenaltyFamily::Cosine => format!("cos({}pi(x+1)/2)", j + 1),
            PenaltyFamily::SignedPower => format!("sign(x)|x|^({}/3)", j + 2),
        }
    }

    pub fn eval(self, j: usize, x: f64) -> f64 {
        match self {
            PenaltyFamily::Cosine => ((j + 1) as f64 * std::f64::consts::PI * (x + 1.0) / 2.0).cos(),
            PenaltyFamily::SignedPower => x.signum() * x.abs().powf((j + 2) as f64 / 3.0),
        }
    }

    /// `∫_{-1}^{1} f'²` by quadrature. The signed powers are integrated after
    /// substituting `x = t³`, which removes the singularity at 0.
    pub fn oracle(self, j: usize) -> Result<f64> {
        match self {
            PenaltyFamily::Cosine => {
                let w = (j + 1) as f64 * std::f64::consts::PI / 2.0;
                quad(|x| (w * (w * (x + 1.0)).sin()).powi(2), -1.0, 1.0)
            }
            PenaltyFamily::SignedPower => {
                let a = (j + 2) as f64 / 3.0;
                // f'(t³)² · 3t² = a² t^{6a-6} · 3t²
                let half = quad(|t| 3.0 * a * a * t.powf(6.0 * a - 4.0), 0.0, 1.0)?;
                Ok(2.0 * half)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyCurve {
    pub family: PenaltyFamily,
    pub functions: Vec<String>,
    /// `∫‖∇f‖²` per function.
    pub truth: Vec<f64>,
    pub methods: Vec<Method>,
    /// Scaled `fᵀLf` per method (rows) and function.
    pub empirical: Vec<Vec<f64>>,
    /// `(empirical - truth) / truth`.
    pub relative_error: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl PenaltyCurve {
    pub fn row(&self, method: Method) -> Option<usize> {
        self.methods.iter().position(|&m| m == method)
    }
}

/// Scaled penalties of each family member under each method, against the
/// quadrature oracle, on a cloud over the segment `[-1, 1]`.
pub fn penalty_fidelity(cloud: &SampleCloud, methods: &[Method], family: PenaltyFamily, h: f64) -> Result<PenaltyCurve> {
    let spec = &cloud.spec;
    let bounds = spec.chart_bounds()?;
    if spec.kind != ManifoldKind::Segment || (bounds[0].0 + 1.0).abs() > 1e-12 || (bounds[0].1 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("penalty fidelity needs the segment [-1, 1]".into()));
    }
    let graph = build_graph(cloud, NeighborhoodMode::HBall { h })?;
    let truth: Vec<f64> = (0..PenaltyFamily::SIZE).map(|j| family.oracle(j)).collect::<Result<_>>()?;
    let fs: Vec<Vec<f64>> = (0..PenaltyFamily::SIZE).map(|j| cloud.eval(|u| family.eval(j, u[0]))).collect();
    let mut empirical = Vec::new();
    let mut relative_error = Vec::new();
    for &method in methods {
        let op = build_operator(method, cloud, &graph, &OperatorParams::new(1))?;
        let row: Vec<f64> = fs.iter().map(|f| scaled_penalty(&op, cloud, h, f)).collect::<Result<_>>()?;
        relative_error.push(row.iter().zip(&truth).map(|(e, t)| (e - t) / t).collect());
        empirical.push(row);
    }
    Ok(PenaltyCurve {
        family,
        functions: (0..PenaltyFamily::SIZE).map(|j| family.label(j)).collect(),
        truth,
        methods: methods.to_vec(),
        empirical,
        relative_error,
        provenance: Provenance::of(cloud, h, methods),
    })
}

/// Second-order penalties of `u₁u₂`, which is harmonic but not affine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullspaceContrast {
    /// Estimate of `∫_interior (Δf)²` from `‖L_LE f‖²`.
    pub j_laplacian_squared: f64,
    /// Estimate of `∫‖Hf‖²` from the scaled HLLE form.
    pub j_hlle: f64,
    /// `j_hlle / area`, to compare with `‖H(u₁u₂)‖² = 2`.
    pub j_hlle_per_area: f64,
    /// The same two penalties for `u₁² + u₂²`, where `Δf = 4`.
    pub control_laplacian_squared: f64,
    pub control_hlle: f64,
    pub provenance: Provenance,
}

/// Contrasts the iterated Laplacian and the HLLE penalty on `u₁u₂` over a
/// rectangle cloud.
pub fn penalty_nullspace_contrast(cloud: &SampleCloud, h: f64) -> Result<NullspaceContrast> {
    if cloud.spec.kind != ManifoldKind::Rectangle {
        return Err(Error::InvalidArgument("nullspace contrast needs a rectangle".into()));
    }
    let graph = build_graph(cloud, NeighborhoodMode::HBall { h })?;
    let params = OperatorParams::new(2);
    let le = build_operator(Method::LaplacianEigenmaps, cloud, &graph, &params)?;
    let he = build_operator(Method::Hlle, cloud, &graph, &params)?;
    let n = cloud.len() as f64;
    let area = cloud.spec.volume()?;
    let p = 1.0 / area;
    let (_, mu2) = ball_moments(2, h, le.kernel.unwrap_or(Kernel::Gaussian { width: h }))?;
    let interior = cloud.interior(h);
    let iterated = |f: &[f64]| -> Result<f64> {
        let lf = le.apply(f)?;
        let s: f64 = interior.iter().map(|&i| lf[i] * lf[i]).sum();
        Ok(4.0 * s / (n.powi(3) * p.powi(3) * mu2 * mu2))
    };
    let f = cloud.eval(|u| u[0] * u[1]);
    let g = cloud.eval(|u| u[0] * u[0] + u[1] * u[1]);
    let j_hlle = scaled_penalty(&he, cloud, h, &f)?;
    Ok(NullspaceContrast {
        j_laplacian_squared: iterated(&f)?,
        j_hlle,
        j_hlle_per_area: j_hlle / area,
        control_laplacian_squared: iterated(&g)?,
        control_hlle: scaled_penalty(&he, cloud, h, &g)?,
        provenance: Provenance::of(cloud, h, &[Method::LaplacianEigenmaps, Method::Hlle]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn constant_kernel_moments() {
        // interval [-h, h]: μ₀ = 2h, μ₂ = 2h³/3; disc: μ₀ = πh², μ₂ = πh⁴/4
        let (a, b) = ball_moments(1, 0.5, Kernel::Constant).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (b - 0.25 / 3.0).abs() < 1e-12);
        let (a, b) = ball_moments(2, 0.5, Kernel::Constant).unwrap();
        assert!((a - PI * 0.25).abs() < 1e-12 && (b - PI * 0.0625 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn oracles_match_closed_forms() {
        for j in 0..5 {
            let k = (j + 1) as f64;
            assert!((PenaltyFamily::Cosine.oracle(j).unwrap() - k * k * PI * PI / 4.0).abs() < 1e-9);
            let a = (j + 2) as f64 / 3.0;
            let exact = 2.0 * a * a / (2.0 * a - 1.0);
            assert!((PenaltyFamily::SignedPower.oracle(j).unwrap() - exact).abs() < 1e-9 * exact);
        }
    }
}
