//! Bottom spectra of several operators on the same segment cloud.

use serde::{Deserialize, Serialize};

use super::{correlation, Provenance};
use crate::error::{Error, Result};
use crate::manifold::{ManifoldKind, SampleCloud};
use crate::neighborhoods::{build_graph, NeighborhoodMode};
use crate::operators::{build_operator, Method, OperatorParams};
use crate::spectral::{embed, SolverOptions, TRIVIAL_THRESHOLD};

/// Largest inverse participation ratio `n Σ v_i⁴ / (Σ v_i²)²` over the
/// columns. It is 1 for a constant vector and `n` for a single spike.
pub fn participation(vectors: &[Vec<f64>]) -> f64 {
    vectors
        .iter()
        .map(|v| {
            let s2: f64 = v.iter().map(|x| x * x).sum();
            let s4: f64 = v.iter().map(|x| x.powi(4)).sum();
            v.len() as f64 * s4 / (s2 * s2)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpectrum {
    pub method: Method,
    /// Ascending eigenvalues after removing the constant.
    pub eigenvalues: Vec<f64>,
    /// `λ_k / λ₁`, absent when `λ₁` is numerically zero.
    pub ratios: Option<Vec<f64>>,
    /// The bottom nontrivial eigenvector.
    pub bottom_vector: Vec<f64>,
    /// `|corr|` of the bottom vector with `cos(πt)` and with `t`, where `t`
    /// maps the segment to `[0, 1]`.
    pub cosine_correlation: f64,
    pub linear_correlation: f64,
    pub min_gap: f64,
    pub mean_gap: f64,
    pub participation: f64,
    pub null_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub p: usize,
    pub chart: Vec<f64>,
    pub methods: Vec<MethodSpectrum>,
    pub provenance: Provenance,
}

impl SpectrumReport {
    pub fn get(&self, method: Method) -> Option<&MethodSpectrum> {
        self.methods.iter().find(|s| s.method == method)
    }
}

/// Bottom `p` nontrivial eigenpairs of each method on a segment cloud.
pub fn spectrum_compare(
    cloud: &SampleCloud,
    methods: &[Method],
    p: usize,
    h: f64,
    opts: &SolverOptions,
) -> Result<SpectrumReport> {
    if cloud.spec.kind != ManifoldKind::Segment {
        return Err(Error::InvalidArgument("spectrum comparison needs a segment".into()));
    }
    if p < 2 {
        return Err(Error::InvalidArgument(format!("need p >= 2, got {p}")));
    }
    let (lo, hi) = cloud.spec.chart_bounds()?[0];
    let chart: Vec<f64> = (0..cloud.len()).map(|i| cloud.intrinsic[(i, 0)]).collect();
    let t: Vec<f64> = chart.iter().map(|x| (x - lo) / (hi - lo)).collect();
    let cosine: Vec<f64> = t.iter().map(|v| (std::f64::consts::PI * v).cos()).collect();
    let graph = build_graph(cloud, NeighborhoodMode::HBall { h })?;
    let mut out = Vec::new();
    for &method in methods {
        let op = build_operator(method, cloud, &graph, &OperatorParams::new(1))?;
        let e = embed(&op, p, true, opts)?;
        let vectors: Vec<Vec<f64>> = (0..p).map(|j| e.column(j)).collect();
        let values = e.spectrum.clone();
        let gaps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let ratios = (values[0] > TRIVIAL_THRESHOLD * e.lambda_max)
            .then(|| values.iter().map(|v| v / values[0]).collect());
        out.push(MethodSpectrum {
            method,
            ratios,
            cosine_correlation: correlation(&vectors[0], &cosine).abs(),
            linear_correlation: correlation(&vectors[0], &t).abs(),
            min_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
            mean_gap: gaps.iter().sum::<f64>() / gaps.len() as f64,
            participation: participation(&vectors),
            bottom_vector: vectors[0].clone(),
            eigenvalues: values,
            null_dim: e.null_dim,
        });
    }
    Ok(SpectrumReport { p, chart, methods: out, provenance: Provenance::of(cloud, h, methods) })
}
