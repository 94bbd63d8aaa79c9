use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid manifold spec: {0}")]
    InvalidSpec(String),

    #[error("chart coordinates {coords:?} lie outside the domain of {manifold}")]
    OutsideDomain { manifold: String, coords: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {index} has no neighbors within h = {h}; the smallest viable h is {min_h}")]
    IsolatedPoint { index: usize, h: f64, min_h: f64 },

    #[error("degenerate local frame at point {index}: {reason}")]
    DegenerateFrame { index: usize, reason: String },

    #[error("degenerate quadratic frame at point {index}: monomial {column} is linearly dependent")]
    DegenerateQuadraticFrame { index: usize, column: usize },

    #[error("degenerate weights at point {index}: normalizer {normalizer:e} is too small")]
    DegenerateWeights { index: usize, normalizer: f64 },

    #[error("singular Gram matrix at point {index}; use a ridge lambda > 0")]
    SingularGram { index: usize },

    #[error("eigensolver did not converge after {iterations} iterations (max residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("no trivial eigenvector: {0}")]
    NoTrivialVector(String),

    #[error("estimation failed at point {index}: {reason}")]
    Estimation { index: usize, reason: String },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed file: {0}")]
    Format(String),
}

/// Coarse error classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidSpec(_)
            | Error::OutsideDomain { .. }
            | Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::IsolatedPoint { .. } => ErrorKind::Validation,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Format(_) => ErrorKind::Io,
            _ => ErrorKind::Numerical,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
