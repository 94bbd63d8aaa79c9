//! Local spectral dimensionality reduction methods written as bias operators
//! `L = G(I - S)` of linear smoothers, together with their eigen-embeddings
//! and numerical checks of their interior and boundary behavior.
//!
//! The pipeline is
//!
//! 1. [`manifold`]: sample a synthetic manifold with a known isometric chart;
//! 2. [`neighborhoods`]: build neighborhoods and local tangent frames;
//! 3. [`operators`]: assemble a sparse [`BiasOperator`];
//! 4. [`spectral`]: take bottom eigenvectors as an [`Embedding`];
//! 5. [`diagnostics`]: compare the result with what the limit operator predicts.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod io;
pub mod manifold;
pub mod neighborhoods;
pub mod operators;
pub mod sparse;
pub mod spectral;

pub use error::{Error, ErrorKind, Result};
pub use manifold::{lattice_manifold, sample_manifold, ManifoldKind, ManifoldSpec, SampleCloud, Sampling};
pub use neighborhoods::{build_graph, local_frame, local_frames, Centering, LocalFrame, NeighborhoodGraph, NeighborhoodMode};
pub use operators::{build_operator, BiasOperator, Kernel, Method, OperatorParams, Ridge};
pub use sparse::CsrMatrix;
pub use spectral::{bottom_eigenpairs, embed, Eigenpairs, Embedding, SolverKind, SolverOptions};
