//! End-to-end experiments shared by the command line and the acceptance suite.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    boundary_table, penalty_fidelity, spectrum_compare, BoundaryTable, PenaltyCurve, PenaltyFamily, Provenance,
    SpectrumReport,
};
use crate::error::Result;
use crate::manifold::{lattice_manifold, sample_manifold, ManifoldSpec, SampleCloud};
use crate::neighborhoods::{build_graph, NeighborhoodMode};
use crate::operators::{build_operator, Method, OperatorParams};
use crate::spectral::{align_procrustes, canonical_correlations, embed, Embedding, SolverOptions};

/// The four Laplace-Beltrami approximations compared on the segment.
pub const SEGMENT_METHODS: [Method; 4] =
    [Method::LaplacianEigenmaps, Method::DiffusionMaps, Method::LlrLaplacian, Method::CoefficientLaplacian];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Method {
    pub method: Method,
    /// Procrustes residual of the 2-d embedding against the chart.
    pub procrustes: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Report {
    pub methods: Vec<Fig1Method>,
    /// Canonical correlations of the bottom three LDR-LLE+ eigenvectors
    /// with `{u₁, u₂, u₁u₂}`.
    pub ldr_lle_plus_canonical: Option<Vec<f64>>,
    pub mode: NeighborhoodMode,
    pub provenance: Provenance,
}

impl Fig1Report {
    pub fn residual(&self, method: Method) -> Option<f64> {
        self.methods.iter().find(|m| m.method == method).and_then(|m| m.procrustes)
    }
}

pub struct Fig1Output {
    pub cloud: SampleCloud,
    pub report: Fig1Report,
    pub embeddings: Vec<Embedding>,
}

/// Every method on the Swiss roll with a hole. Methods that fail are
/// recorded rather than aborting the run.
pub fn fig1(n: usize, seed: u64, mode: NeighborhoodMode, opts: &SolverOptions) -> Result<Fig1Output> {
    let cloud = sample_manifold(&ManifoldSpec::swiss_roll_hole(), n, seed)?;
    let graph = build_graph(&cloud, mode)?;
    let params = OperatorParams::new(2);
    let chart = cloud.intrinsic.clone();
    let mut methods = Vec::new();
    let mut embeddings = Vec::new();
    let mut canonical = None;
    for method in Method::ALL {
        let p = if method == Method::LdrLlePlus { 3 } else { 2 };
        let run = build_operator(method, &cloud, &graph, &params).and_then(|op| embed(&op, p, true, opts));
        match run {
            Ok(e) => {
                let two = e.coords.columns(0, 2).into_owned();
                let residual = align_procrustes(&two, &chart)?.0;
                if method == Method::LdrLlePlus {
                    let target = DMatrix::from_fn(cloud.len(), 3, |i, c| match c {
                        2 => chart[(i, 0)] * chart[(i, 1)],
                        _ => chart[(i, c)],
                    });
                    canonical = Some(canonical_correlations(&e.coords, &target)?);
                }
                methods.push(Fig1Method { method, procrustes: Some(residual), error: None });
                embeddings.push(e);
            }
            Err(err) => methods.push(Fig1Method { method, procrustes: None, error: Some(err.to_string()) }),
        }
    }
    let report = Fig1Report {
        methods,
        ldr_lle_plus_canonical: canonical,
        mode,
        provenance: Provenance::of(&cloud, graph.bandwidth(), &Method::ALL),
    };
    Ok(Fig1Output { cloud, report, embeddings })
}

/// Spectra of the segment methods on a uniform sample of `[0, 1]`.
pub fn fig2(n: usize, h: f64, p: usize, seed: u64, opts: &SolverOptions) -> Result<(SampleCloud, SpectrumReport)> {
    let cloud = sample_manifold(&ManifoldSpec::segment(0.0, 1.0), n, seed)?;
    let report = spectrum_compare(&cloud, &SEGMENT_METHODS, p, h, opts)?;
    Ok((cloud, report))
}

/// Penalty curves of both families on a uniform sample of `[-1, 1]`.
pub fn fig3(n: usize, h: f64, seed: u64) -> Result<(PenaltyCurve, PenaltyCurve)> {
    let cloud = sample_manifold(&ManifoldSpec::segment(-1.0, 1.0), n, seed)?;
    let cos = penalty_fidelity(&cloud, &SEGMENT_METHODS, PenaltyFamily::Cosine, h)?;
    let pow = penalty_fidelity(&cloud, &SEGMENT_METHODS, PenaltyFamily::SignedPower, h)?;
    Ok((cos, pow))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTableConfig {
    pub n: usize,
    pub width: f64,
    pub height: f64,
    /// Neighborhood radius of the operator.
    pub h: f64,
    /// Radius of the quadratic fits.
    pub bandwidth: f64,
    /// Non-null eigenfunctions to examine.
    pub eigenfunctions: usize,
    pub per_face: usize,
    pub seed: u64,
    pub method: Method,
}

impl Default for BoundaryTableConfig {
    fn default() -> Self {
        Self {
            n: 4000,
            width: 1.0,
            height: 0.625,
            h: 0.05,
            bandwidth: 0.15,
            eigenfunctions: 10,
            per_face: 10,
            seed: 0,
            method: Method::Ltsa,
        }
    }
}

/// Mean eigenfunction Hessians at boundary points of a rectangle.
pub fn boundary_table_experiment(cfg: &BoundaryTableConfig, opts: &SolverOptions) -> Result<BoundaryTable> {
    let cloud = sample_manifold(&ManifoldSpec::rectangle(cfg.width, cfg.height), cfg.n, cfg.seed)?;
    let graph = build_graph(&cloud, NeighborhoodMode::HBall { h: cfg.h })?;
    let op = build_operator(cfg.method, &cloud, &graph, &OperatorParams::new(2))?;
    // the null space is found first, then enough columns past it
    let probe = embed(&op, 4, true, opts)?;
    let skip = probe.null_dim.saturating_sub(1);
    let e = embed(&op, skip + cfg.eigenfunctions, true, opts)?;
    boundary_table(&cloud, &e, cfg.bandwidth, cfg.per_face, 2.0 * cfg.h)
}

/// Uniform clouds whose size grows as `h^{-m}`, so neighborhoods hold a
/// similar number of points on every rung.
pub fn random_ladder(spec: &ManifoldSpec, hs: &[f64], n_first: usize, seed: u64) -> Result<Vec<(SampleCloud, f64)>> {
    let m = spec.intrinsic_dim as i32;
    hs.iter()
        .enumerate()
        .map(|(k, &h)| {
            let n = (n_first as f64 * (hs[0] / h).powi(m)).round() as usize;
            Ok((sample_manifold(spec, n, seed + k as u64)?, h))
        })
        .collect()
}

/// Lattices with spacing `h / ratio` on every rung.
pub fn lattice_ladder(spec: &ManifoldSpec, hs: &[f64], ratio: f64) -> Result<Vec<(SampleCloud, f64)>> {
    let bounds = spec.chart_bounds()?;
    hs.iter()
        .map(|&h| {
            let counts: Vec<usize> =
                bounds.iter().map(|(lo, hi)| ((hi - lo) * ratio / h).round() as usize + 1).collect();
            Ok((lattice_manifold(spec, &counts)?, h))
        })
        .collect()
}
