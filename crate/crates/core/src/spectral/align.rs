//! Comparing embeddings with reference coordinates.

use nalgebra::{DMatrix, RowDVector};

use crate::error::{Error, Result};
use crate::neighborhoods::sorted_svd;

/// `x ↦ scale · x · rotation + translation` acting on row vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Similarity {
    /// Orthogonal; reflections are allowed.
    pub rotation: DMatrix<f64>,
    pub scale: f64,
    pub translation: RowDVector<f64>,
}

impl Similarity {
    pub fn apply(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = a * &self.rotation * self.scale;
        for mut row in out.row_iter_mut() {
            row += &self.translation;
        }
        out
    }
}

fn centered(a: &DMatrix<f64>) -> (DMatrix<f64>, RowDVector<f64>) {
    let mean = a.row_mean();
    let mut c = a.clone();
    for mut row in c.row_iter_mut() {
        row -= &mean;
    }
    (c, mean)
}

fn check_shapes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch { expected: b.nrows(), got: a.nrows() });
    }
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch { expected: b.ncols(), got: a.ncols() });
    }
    Ok(())
}

/// Best similarity transform of `a` onto `b`. The residual is
/// `‖T(a) - b‖_F / ‖b - mean(b)‖_F`.
pub fn align_procrustes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, Similarity)> {
    check_shapes(a, b)?;
    let (ac, _) = centered(a);
    let (bc, bmean) = centered(b);
    let bnorm = bc.norm();
    if bnorm == 0.0 {
        return Err(Error::InvalidArgument("reference configuration has zero variance".into()));
    }
    let p = a.ncols();
    let anorm2 = ac.norm_squared();
    let (rotation, scale) = if anorm2 == 0.0 {
        (DMatrix::identity(p, p), 0.0)
    } else {
        let (u, s, vt) = sorted_svd(ac.transpose() * &bc);
        (u * vt, s.iter().sum::<f64>() / anorm2)
    };
    let amean = a.row_mean();
    let translation = bmean - amean * &rotation * scale;
    let t = Similarity { rotation, scale, translation };
    let residual = (t.apply(a) - b).norm() / bnorm;
    Ok((residual, t))
}

/// Least-squares affine fit of `b` from `a`; returns the relative residual
/// `‖[1 a] M - b‖_F / ‖b - mean(b)‖_F` and the fitted configuration.
pub fn align_affine(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch { expected: b.nrows(), got: a.nrows() });
    }
    let (bc, _) = centered(b);
    let bnorm = bc.norm();
    if bnorm == 0.0 {
        return Err(Error::InvalidArgument("reference configuration has zero variance".into()));
    }
    let (ac, _) = centered(a);
    let q = orthonormal_columns(&ac);
    let fit = &q * (q.transpose() * &bc);
    let residual = (&fit - &bc).norm() / bnorm;
    let mut fitted = fit;
    let bmean = b.row_mean();
    for mut row in fitted.row_iter_mut() {
        row += &bmean;
    }
    Ok((residual, fitted))
}

/// Orthonormal basis of the column space (rank decided at `1e-10` relative).
fn orthonormal_columns(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return a.clone();
    }
    let (u, s, _) = sorted_svd(a.clone());
    let top = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&v| v > 1e-10 * top && v > 0.0).count();
    u.columns(0, rank).into_owned()
}

/// Canonical correlations between the column spaces of `a` and `b` (after
/// centering), descending.
pub fn canonical_correlations(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch { expected: b.nrows(), got: a.nrows() });
    }
    let qa = orthonormal_columns(&centered(a).0);
    let qb = orthonormal_columns(&centered(b).0);
    if qa.ncols() == 0 || qb.ncols() == 0 {
        return Err(Error::InvalidArgument("configuration has zero variance".into()));
    }
    let (_, s, _) = sorted_svd(qa.transpose() * qb);
    Ok(s.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, 2, |r, c| ((r * 37 + c * 11) % 17) as f64 / 17.0 + if c == 1 { (r as f64).sin() } else { 0.0 })
    }

    #[test]
    fn identical_configurations() {
        let b = sample(30);
        let (res, t) = align_procrustes(&b, &b).unwrap();
        assert!(res < 1e-12);
        assert!((t.scale - 1.0).abs() < 1e-12);
        assert!((t.rotation - DMatrix::identity(2, 2)).abs().max() < 1e-12);
    }

    #[test]
    fn rotated_scaled_shifted() {
        let b = sample(30);
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let mut a = &b * rot * 3.0;
        for mut row in a.row_iter_mut() {
            row[0] += 5.0;
        }
        assert!(align_procrustes(&a, &b).unwrap().0 < 1e-10);
        // a reflection is also a valid orthogonal alignment
        let flipped = DMatrix::from_fn(30, 2, |r, c| if c == 0 { -b[(r, 0)] } else { b[(r, 1)] });
        assert!(align_procrustes(&flipped, &b).unwrap().0 < 1e-10);
    }

    #[test]
    fn correlations_of_linear_images() {
        let a = sample(40);
        let b = &a * DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.5, -1.0]);
        let cc = canonical_correlations(&a, &b).unwrap();
        assert!(cc.iter().all(|v| (v - 1.0).abs() < 1e-10));
        assert!(align_affine(&a, &b).unwrap().0 < 1e-10);
    }

    #[test]
    fn zero_variance_reference_is_rejected() {
        let a = sample(10);
        assert!(align_procrustes(&a, &DMatrix::from_element(10, 2, 1.0)).is_err());
    }
}
