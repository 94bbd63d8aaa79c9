use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// All eigenpairs of a symmetric matrix, ascending; returns the bottom `k`
/// and the largest eigenvalue.
pub(super) fn bottom(a: &CsrMatrix, k: usize) -> Result<(Vec<f64>, DMatrix<f64>, f64)> {
    let n = a.nrows();
    let mut m = Mat::<f64>::zeros(n, n);
    for (i, j, v) in a.triplets() {
        m[(i, j)] += 0.5 * v;
        m[(j, i)] += 0.5 * v;
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NotConverged { iterations: 0, residual: f64::NAN })?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..k).map(|j| s[j]).collect();
    let vectors = DMatrix::from_fn(n, k, |r, c| u[(r, c)]);
    Ok((values, vectors, s[n - 1]))
}
