//! Bias operators `L = G(I - S)` for the local spectral methods.
//!
//! Kernel methods ([`diffusion_maps`], [`laplacian_eigenmaps`]) and the
//! weight methods ([`lle`], [`ldr_lle`], [`ldr_lle_plus`], [`llr_laplacian`])
//! build a smoother `S` row by row. The alignment methods ([`hlle`], [`ltsa`],
//! [`coefficient_laplacian`]) sum local positive semidefinite blocks instead.
//!
//! Operators are stored unscaled. `scale_exponent` records the power of `h`
//! that turns `L` into its continuum limit.

mod kernel;
mod local;
mod weights;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::SampleCloud;
use crate::neighborhoods::{local_frames, Centering, LocalFrame, NeighborhoodGraph};
use crate::sparse::CsrMatrix;

pub use kernel::{diffusion_maps, laplacian_eigenmaps, Kernel};
pub use local::{coefficient_laplacian, hlle, llr_laplacian, ltsa};
pub use weights::{ldr_lle, ldr_lle_plus, lle, Ridge};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DiffusionMaps,
    LaplacianEigenmaps,
    Lle,
    LdrLle,
    LdrLlePlus,
    Hlle,
    Ltsa,
    LlrLaplacian,
    CoefficientLaplacian,
}

/// Static properties of a method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodTraits {
    pub symmetric: bool,
    pub psd_claimed: bool,
    pub smoother_order: u32,
    pub scale_exponent: i32,
    pub stable: bool,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::DiffusionMaps,
        Method::LaplacianEigenmaps,
        Method::Lle,
        Method::LdrLle,
        Method::LdrLlePlus,
        Method::Hlle,
        Method::Ltsa,
        Method::LlrLaplacian,
        Method::CoefficientLaplacian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::DiffusionMaps => "diffusion_maps",
            Method::LaplacianEigenmaps => "laplacian_eigenmaps",
            Method::Lle => "lle",
            Method::LdrLle => "ldr_lle",
            Method::LdrLlePlus => "ldr_lle_plus",
            Method::Hlle => "hlle",
            Method::Ltsa => "ltsa",
            Method::LlrLaplacian => "llr_laplacian",
            Method::CoefficientLaplacian => "coefficient_laplacian",
        }
    }

    pub fn traits(self) -> MethodTraits {
        let t = |symmetric, psd_claimed, smoother_order, scale_exponent, stable| MethodTraits {
            symmetric,
            psd_claimed,
            smoother_order,
            scale_exponent,
            stable,
        };
        match self {
            Method::DiffusionMaps => t(false, false, 0, -2, true),
            Method::LaplacianEigenmaps => t(true, true, 0, -2, true),
            Method::Lle => t(true, false, 2, -4, false),
            Method::LdrLle => t(true, false, 2, -4, false),
            Method::LdrLlePlus => t(true, false, 1, -4, true),
            Method::Hlle => t(true, true, 2, -4, true),
            Method::Ltsa => t(true, true, 1, -4, true),
            Method::LlrLaplacian => t(false, false, 1, -2, true),
            Method::CoefficientLaplacian => t(true, true, 1, 0, true),
        }
    }

    /// Centering of the local frames the method consumes, if any.
    pub fn frame_centering(self) -> Option<Centering> {
        match self {
            Method::DiffusionMaps | Method::LaplacianEigenmaps | Method::Lle => None,
            Method::Hlle | Method::Ltsa => Some(Centering::OnMean),
            _ => Some(Centering::OnPoint),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        let m = match norm.as_str() {
            "dm" => Some(Method::DiffusionMaps),
            "le" => Some(Method::LaplacianEigenmaps),
            "llr" => Some(Method::LlrLaplacian),
            "cl" => Some(Method::CoefficientLaplacian),
            _ => Method::ALL.into_iter().find(|m| m.name() == norm),
        };
        m.ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

/// An assembled operator with its method metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasOperator {
    pub l: CsrMatrix,
    pub method: Method,
    pub symmetric: bool,
    pub psd_claimed: bool,
    pub smoother_order: u32,
    pub scale_exponent: i32,
    pub stable: bool,
    pub h: f64,
    /// The smoother `S` (or weight matrix `W`) for row-based methods.
    pub smoother: Option<CsrMatrix>,
    /// Edge weights of kernel methods.
    pub kernel: Option<Kernel>,
}

impl BiasOperator {
    pub(crate) fn new(method: Method, l: CsrMatrix, h: f64, smoother: Option<CsrMatrix>) -> Self {
        let t = method.traits();
        Self {
            l,
            method,
            symmetric: t.symmetric,
            psd_claimed: t.psd_claimed,
            smoother_order: t.smoother_order,
            scale_exponent: t.scale_exponent,
            stable: t.stable,
            h,
            smoother,
            kernel: None,
        }
    }

    pub fn n(&self) -> usize {
        self.l.nrows()
    }

    /// `fᵀ L f`.
    pub fn quadratic_form(&self, f: &[f64]) -> Result<f64> {
        self.l.quadratic_form(f)
    }

    /// `L f`.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.l.mul_vec(f)
    }

    /// `(I - S) f`, the raw smoother residual, when a smoother is stored.
    pub fn residual(&self, f: &[f64]) -> Result<Option<Vec<f64>>> {
        match &self.smoother {
            None => Ok(None),
            Some(s) => {
                let sf = s.mul_vec(f)?;
                Ok(Some(f.iter().zip(&sf).map(|(a, b)| a - b).collect()))
            }
        }
    }

    /// `Lᵀ L`.
    pub fn normal_product(&self) -> CsrMatrix {
        self.l.transpose().matmul(&self.l).expect("square operator")
    }

    /// `L Lᵀ`.
    pub fn adjoint_product(&self) -> CsrMatrix {
        self.l.matmul(&self.l.transpose()).expect("square operator")
    }

    /// The symmetric matrix whose bottom eigenvectors give the embedding:
    /// `L` itself when symmetric, otherwise `Lᵀ L`.
    pub fn eigen_matrix(&self) -> CsrMatrix {
        if self.symmetric {
            self.l.clone()
        } else {
            self.normal_product()
        }
    }

    /// The same operator multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { l: self.l.scaled(c), ..self.clone() }
    }
}

/// Per-method parameters for [`build_operator`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    /// Intrinsic dimension used for the local frames.
    pub m: usize,
    /// Ridge for LLE and LDR-LLE.
    pub ridge: Ridge,
    /// Kernel for Laplacian eigenmaps; Gaussian with the graph bandwidth if `None`.
    pub kernel: Option<Kernel>,
}

impl OperatorParams {
    pub fn new(m: usize) -> Self {
        Self { m, ridge: Ridge::default(), kernel: None }
    }
}

/// Builds the operator for `method`, computing local frames as needed.
pub fn build_operator(
    method: Method,
    cloud: &SampleCloud,
    graph: &NeighborhoodGraph,
    params: &OperatorParams,
) -> Result<BiasOperator> {
    if graph.len() != cloud.len() {
        return Err(Error::DimensionMismatch { expected: cloud.len(), got: graph.len() });
    }
    let h = graph.bandwidth();
    let frames = match method.frame_centering() {
        Some(c) => local_frames(cloud, graph, params.m, c)?,
        None => Vec::new(),
    };
    match method {
        Method::DiffusionMaps => diffusion_maps(cloud, graph, h),
        Method::LaplacianEigenmaps => {
            let kernel = params.kernel.unwrap_or(Kernel::Gaussian { width: h });
            laplacian_eigenmaps(cloud, graph, kernel)
        }
        Method::Lle => lle(cloud, graph, params.ridge),
        Method::LdrLle => ldr_lle(cloud, graph, &frames, params.ridge),
        Method::LdrLlePlus => ldr_lle_plus(cloud, graph, &frames),
        Method::Hlle => hlle(graph, &frames),
        Method::Ltsa => ltsa(graph, &frames),
        Method::LlrLaplacian => llr_laplacian(graph, &frames),
        Method::CoefficientLaplacian => coefficient_laplacian(graph, &frames),
    }
}

fn check_frames(graph: &NeighborhoodGraph, frames: &[LocalFrame], centering: Option<Centering>) -> Result<()> {
    if frames.len() != graph.len() {
        return Err(Error::DimensionMismatch { expected: graph.len(), got: frames.len() });
    }
    for (i, f) in frames.iter().enumerate() {
        if f.center_index != i || f.members != graph.closed(i) {
            return Err(Error::InvalidArgument(format!("frame {i} does not match the neighborhood graph")));
        }
        if let Some(c) = centering {
            if f.centering != c {
                return Err(Error::InvalidArgument(format!("frames must be centered {c:?}")));
            }
        }
    }
    Ok(())
}

/// Scatters local `K × K` blocks into a global `n × n` matrix.
fn assemble_blocks(n: usize, blocks: Vec<(Vec<usize>, DMatrix<f64>)>) -> CsrMatrix {
    let cap = blocks.iter().map(|(idx, _)| idx.len() * idx.len()).sum();
    let mut t = Vec::with_capacity(cap);
    for (idx, q) in blocks {
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                t.push((i, j, q[(a, b)]));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, t)
}

/// `I - W` from rows given as `(columns, weights)`.
fn identity_minus(n: usize, rows: &[(Vec<usize>, Vec<f64>)]) -> (CsrMatrix, CsrMatrix) {
    let mut w = Vec::new();
    let mut t = Vec::new();
    for (i, (cols, vals)) in rows.iter().enumerate() {
        t.push((i, i, 1.0));
        for (&j, &v) in cols.iter().zip(vals) {
            w.push((i, j, v));
            t.push((i, j, -v));
        }
    }
    (CsrMatrix::from_triplets(n, n, t), CsrMatrix::from_triplets(n, n, w))
}

/// Modified Gram-Schmidt with one full re-orthogonalization pass. Returns the
/// orthonormalized columns, or the first column whose norm collapses below
/// `1e-12` of its original norm.
pub(crate) fn gram_schmidt(mut a: DMatrix<f64>) -> std::result::Result<DMatrix<f64>, usize> {
    for c in 0..a.ncols() {
        let original = a.column(c).norm();
        for _ in 0..2 {
            for p in 0..c {
                let proj = a.column(p).dot(&a.column(c));
                let q = a.column(p).clone_owned();
                a.column_mut(c).axpy(-proj, &q, 1.0);
            }
        }
        let norm = a.column(c).norm();
        if original == 0.0 || norm < 1e-12 * original {
            return Err(c);
        }
        a.column_mut(c).unscale_mut(norm);
    }
    Ok(a)
}
