//! Numerical checks of what the limit operators predict: boundary
//! conditions, the HLLE/LTSA equivalence, penalty fidelity, spectra and the
//! interior bias rate.

mod boundary;
mod equivalence;
mod hessian;
mod penalty;
pub mod quadrature;
mod scaling;
mod spectrum;

use serde::{Deserialize, Serialize};

use crate::manifold::{ManifoldSpec, SampleCloud, Sampling};
use crate::operators::Method;

pub use boundary::{
    boundary_condition_check, boundary_points, boundary_table, neumann_boundary_check, BoundaryReport, BoundaryTable,
    NeumannReport,
};
pub use equivalence::{equivalence_hlle_ltsa, EquivalenceReport, TestFunction};
pub use hessian::{adapted_frame, estimate_hessian, HessianEstimate};
pub use penalty::{
    ball_moments, penalty_fidelity, penalty_nullspace_contrast, scaled_penalty, NullspaceContrast, PenaltyCurve,
    PenaltyFamily,
};
pub use scaling::{interior_bias_scaling, ScalingFit, ScalingReport};
pub use spectrum::{participation, spectrum_compare, MethodSpectrum, SpectrumReport};

/// Everything needed to regenerate a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec: ManifoldSpec,
    pub n: usize,
    pub seed: u64,
    pub sampling: Sampling,
    pub h: f64,
    pub methods: Vec<Method>,
}

impl Provenance {
    pub fn of(cloud: &SampleCloud, h: f64, methods: &[Method]) -> Self {
        Self {
            spec: cloud.spec.clone(),
            n: cloud.len(),
            seed: cloud.seed,
            sampling: cloud.sampling.clone(),
            h,
            methods: methods.to_vec(),
        }
    }
}

/// Any diagnostic result, tagged for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case")]
pub enum DiagnosticsReport {
    Boundary(BoundaryReport),
    BoundaryTable(BoundaryTable),
    Neumann(NeumannReport),
    Equivalence(EquivalenceReport),
    Penalty(PenaltyCurve),
    Spectrum(SpectrumReport),
    Scaling(ScalingReport),
    NullspaceContrast(NullspaceContrast),
}

/// Pearson correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}
