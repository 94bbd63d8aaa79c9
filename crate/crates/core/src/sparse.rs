//! Compressed sparse row storage for the assembled operators.
//!
//! Assembly goes through [`CsrMatrix::from_triplets`], which sorts entries by
//! `(row, col)` with a stable sort and sums duplicates in input order. Given
//! triplets emitted in a fixed order, the result is bit-identical no matter
//! how the per-neighborhood blocks were computed.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[s..e], &self.values[s..e])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch { expected: self.ncols, got: x.len() });
        }
        Ok((0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect())
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        let ax = self.mul_vec(x)?;
        if ax.len() != x.len() {
            return Err(Error::DimensionMismatch { expected: self.nrows, got: x.len() });
        }
        Ok(x.iter().zip(&ax).map(|(a, b)| a * b).sum())
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                indices[next[j]] = i;
                values[next[j]] = v;
                next[j] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, indptr, indices, values }
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &CsrMatrix) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch { expected: self.ncols, got: other.nrows });
        }
        let mut acc = vec![0.0; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut touched = Vec::new();
        for i in 0..self.nrows {
            touched.clear();
            let (cols, vals) = self.row(i);
            for (&k, &a) in cols.iter().zip(vals) {
                let (ocols, ovals) = other.row(k);
                for (&j, &b) in ocols.iter().zip(ovals) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                indices.push(j);
                values.push(acc[j]);
            }
            indptr.push(indices.len());
        }
        Ok(Self { nrows: self.nrows, ncols: other.ncols, indptr, indices, values })
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &CsrMatrix, c: f64) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch { expected: self.nrows, got: other.nrows });
        }
        let t = self
            .triplets()
            .chain(other.triplets().map(|(i, j, v)| (i, j, c * v)))
            .collect();
        Ok(Self::from_triplets(self.nrows, self.ncols, t))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            a[(i, j)] += v;
        }
        a
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute row sum; an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |A_ij - A_ji|` over the union of both patterns.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let t = self.transpose();
        match self.add_scaled(&t, -1.0) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_in_order() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(1, 0, 2.0), (0, 1, 1.0), (1, 0, 0.5), (0, 0, 3.0)]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(1, 0), 2.5);
        assert_eq!(a.row(0).0, &[0, 1]);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = CsrMatrix::from_triplets(3, 2, vec![(0, 0, 1.0), (1, 1, 2.0), (2, 0, -1.0), (2, 1, 4.0)]);
        let b = CsrMatrix::from_triplets(2, 3, vec![(0, 2, 5.0), (1, 0, 1.5), (1, 1, -2.0)]);
        let c = a.matmul(&b).unwrap().to_dense();
        let expected = a.to_dense() * b.to_dense();
        assert!((c - expected).abs().max() < 1e-15);
    }

    #[test]
    fn transpose_roundtrip() {
        let a = CsrMatrix::from_triplets(2, 3, vec![(0, 2, 1.0), (1, 0, 2.0), (1, 2, 3.0)]);
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.transpose().get(2, 1), 3.0);
    }

    #[test]
    fn mul_vec_rejects_wrong_length() {
        let a = CsrMatrix::identity(3);
        assert!(matches!(a.mul_vec(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }
}
