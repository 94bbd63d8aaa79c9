//! Bottom eigenpairs of bias operators and the embeddings built from them.

mod align;
mod dense;
pub(crate) mod iterative;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighborhoods::fix_signs;
use crate::operators::{BiasOperator, Method};
use crate::sparse::CsrMatrix;

pub use align::{align_affine, align_procrustes, canonical_correlations, Similarity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Dense up to `dense_limit` rows, iterative beyond.
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub kind: SolverKind,
    pub dense_limit: usize,
    /// Relative residual target of the iterative solver.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Pairs computed beyond those requested, to expose clusters.
    pub extra: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { kind: SolverKind::Auto, dense_limit: 2000, tol: 1e-10, max_iter: 2000, seed: 0, extra: 3 }
    }
}

impl SolverOptions {
    pub fn with_kind(mut self, kind: SolverKind) -> Self {
        self.kind = kind;
        self
    }
}

/// Bottom eigenpairs of the symmetric matrix behind an operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// n × p, unit columns, largest-magnitude entry positive.
    pub vectors: DMatrix<f64>,
    /// `‖A v - λ v‖` for each pair.
    pub residuals: Vec<f64>,
    /// The eigenvalues computed past the requested ones.
    pub lookahead: Vec<f64>,
    /// Groups of indices (into `values ++ lookahead`) of nearly equal eigenvalues.
    pub clusters: Vec<Vec<usize>>,
    /// Largest eigenvalue (estimated when solved iteratively).
    pub lambda_max: f64,
    pub solver: SolverKind,
}

/// Eigenvalues closer than this (relative to the larger one, or both below the
/// trivial threshold) are reported as one cluster.
const CLUSTER_GAP: f64 = 1e-3;

/// Relative size below which an eigenvalue counts as zero.
pub const TRIVIAL_THRESHOLD: f64 = 1e-8;

fn clusters(values: &[f64], lambda_max: f64) -> Vec<Vec<usize>> {
    let floor = TRIVIAL_THRESHOLD * lambda_max;
    let mut out = Vec::new();
    let mut cur = vec![0];
    for j in 1..values.len() {
        let (a, b) = (values[j - 1], values[j]);
        if b - a <= CLUSTER_GAP * b.abs().max(floor) {
            cur.push(j);
        } else {
            if cur.len() > 1 {
                out.push(cur.clone());
            }
            cur = vec![j];
        }
    }
    if cur.len() > 1 {
        out.push(cur);
    }
    out
}

fn residuals(a: &CsrMatrix, values: &[f64], vectors: &DMatrix<f64>) -> Vec<f64> {
    (0..values.len())
        .map(|j| {
            let v: Vec<f64> = vectors.column(j).iter().copied().collect();
            let av = a.mul_vec(&v).expect("square");
            av.iter().zip(&v).map(|(x, y)| (x - values[j] * y).powi(2)).sum::<f64>().sqrt()
        })
        .collect()
}

/// Bottom `count` eigenpairs of a symmetric matrix.
pub fn symmetric_bottom(a: &CsrMatrix, count: usize, opts: &SolverOptions) -> Result<Eigenpairs> {
    let n = a.nrows();
    if count == 0 || count >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= p < n, got p = {count}, n = {n}")));
    }
    let total = (count + opts.extra).min(n);
    let kind = match opts.kind {
        SolverKind::Auto if n <= opts.dense_limit => SolverKind::Dense,
        SolverKind::Auto => SolverKind::Iterative,
        k => k,
    };
    let (all_values, mut vectors, lambda_max) = match kind {
        SolverKind::Dense => dense::bottom(a, total)?,
        _ => {
            let io = iterative::IterativeOptions { tol: opts.tol, max_iter: opts.max_iter, seed: opts.seed };
            let (v, x) = iterative::bottom(a, total, &io)?;
            (v, x, iterative::lambda_max(a, opts.seed))
        }
    };
    fix_signs(&mut vectors);
    let clusters = clusters(&all_values, lambda_max);
    let values = all_values[..count].to_vec();
    let vectors = vectors.columns(0, count).into_owned();
    let res = residuals(a, &values, &vectors);
    Ok(Eigenpairs {
        values,
        vectors,
        residuals: res,
        lookahead: all_values[count..].to_vec(),
        clusters,
        lambda_max,
        solver: kind,
    })
}

/// Bottom `p` eigenpairs of `L` (symmetric) or of `LᵀL` (otherwise, i.e. the
/// squared smallest singular values with right singular vectors).
pub fn bottom_eigenpairs(op: &BiasOperator, p: usize, opts: &SolverOptions) -> Result<Eigenpairs> {
    symmetric_bottom(&op.eigen_matrix(), p, opts)
}

/// Spectral embedding: the bottom eigenvectors as coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// n × p, orthonormal columns.
    pub coords: DMatrix<f64>,
    /// Ascending eigenvalues of the kept columns.
    pub spectrum: Vec<f64>,
    pub method: Method,
    pub h: f64,
    pub scale_exponent: i32,
    pub dropped_trivial: bool,
    /// Eigenvalue of the removed near-constant vector.
    pub trivial_eigenvalue: Option<f64>,
    /// Dimension of the near-null space the constant was taken from.
    pub null_dim: usize,
    pub lambda_max: f64,
    pub clusters: Vec<Vec<usize>>,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.coords.nrows()
    }

    pub fn p(&self) -> usize {
        self.coords.ncols()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.coords.column(j).iter().copied().collect()
    }
}

fn coefficient_of_variation(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean.abs()
}

/// Computes an embedding from the bottom eigenvectors. With `drop_trivial`,
/// the near-zero eigenspace is rotated so one vector is the constant, which
/// is then removed.
pub fn embed(op: &BiasOperator, p: usize, drop_trivial: bool, opts: &SolverOptions) -> Result<Embedding> {
    let n = op.n();
    let want = if drop_trivial { p + 1 } else { p };
    if p == 0 || want >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= p < n, got p = {p}, n = {n}")));
    }
    let a = op.eigen_matrix();
    let pairs = symmetric_bottom(&a, (want + opts.extra).min(n - 1), &SolverOptions { extra: 0, ..*opts })?;
    let mut clusters = pairs.clusters.clone();
    clusters.retain(|c| c.iter().all(|&j| j < pairs.values.len()));
    let base = Embedding {
        coords: DMatrix::zeros(0, 0),
        spectrum: Vec::new(),
        method: op.method,
        h: op.h,
        scale_exponent: op.scale_exponent,
        dropped_trivial: drop_trivial,
        trivial_eigenvalue: None,
        null_dim: 0,
        lambda_max: pairs.lambda_max,
        clusters,
    };
    if !drop_trivial {
        return Ok(Embedding {
            coords: pairs.vectors.columns(0, p).into_owned(),
            spectrum: pairs.values[..p].to_vec(),
            ..base
        });
    }

    let floor = TRIVIAL_THRESHOLD * pairs.lambda_max;
    let c = pairs.values.iter().take_while(|&&v| v <= floor).count();
    if c == 0 {
        return Err(Error::NoTrivialVector(format!(
            "smallest eigenvalue {:e} exceeds {:e}",
            pairs.values[0], floor
        )));
    }
    let z = pairs.vectors.columns(0, c);
    let proj = z.transpose() * DMatrix::from_element(n, 1, 1.0);
    let norm = proj.norm();
    if norm == 0.0 {
        return Err(Error::NoTrivialVector("constants are orthogonal to the null space".into()));
    }
    let dir = &proj / norm;
    let constant: Vec<f64> = (&z * &dir).iter().copied().collect();
    let cv = coefficient_of_variation(&constant);
    if !(cv < 1e-4) {
        return Err(Error::NoTrivialVector(format!("closest null vector has coefficient of variation {cv:e}")));
    }
    // orthonormal complement of `dir` inside the null space
    let mut basis = DMatrix::zeros(c, c);
    basis.set_column(0, &dir.column(0));
    let mut filled = 1;
    for e in 0..c {
        if filled == c {
            break;
        }
        let mut v = nalgebra::DVector::zeros(c);
        v[e] = 1.0;
        for _ in 0..2 {
            for q in 0..filled {
                let d = basis.column(q).dot(&v);
                v.axpy(-d, &basis.column(q), 1.0);
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            basis.set_column(filled, &(v / nv));
            filled += 1;
        }
    }
    let rest = &z * basis.columns(1, c - 1);
    let mut coords = DMatrix::zeros(n, p);
    let mut spectrum = Vec::with_capacity(p);
    for j in 0..p {
        if j < c - 1 {
            let col = rest.column(j);
            let v: Vec<f64> = col.iter().copied().collect();
            spectrum.push(a.quadratic_form(&v)?);
            coords.set_column(j, &col);
        } else {
            let src = j + 1;
            if src >= pairs.values.len() {
                return Err(Error::InvalidArgument("not enough eigenpairs after dropping".into()));
            }
            coords.set_column(j, &pairs.vectors.column(src));
            spectrum.push(pairs.values[src]);
        }
    }
    fix_signs(&mut coords);
    Ok(Embedding {
        coords,
        spectrum,
        trivial_eigenvalue: Some(pairs.values[0]),
        null_dim: c,
        ..base
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            let j = (i + 1) % n;
            t.extend([(i, i, 1.0), (j, j, 1.0), (i, j, -1.0), (j, i, -1.0)]);
        }
        CsrMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn cycle_spectrum_and_clusters() {
        let n = 40;
        let pairs = symmetric_bottom(&cycle(n), 5, &SolverOptions::default()).unwrap();
        let exact = |j: usize| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos();
        let expected = [exact(0), exact(1), exact(1), exact(2), exact(2)];
        for (v, e) in pairs.values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12);
        }
        assert!(pairs.clusters.contains(&vec![1, 2]));
        assert!(pairs.residuals.iter().all(|r| *r < 1e-10));
    }

    #[test]
    fn dense_and_iterative_agree() {
        let a = cycle(50);
        let d = symmetric_bottom(&a, 3, &SolverOptions::default().with_kind(SolverKind::Dense)).unwrap();
        let i = symmetric_bottom(&a, 3, &SolverOptions::default().with_kind(SolverKind::Iterative)).unwrap();
        for (x, y) in d.values.iter().zip(&i.values) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn cv_of_constant_is_zero() {
        assert_eq!(coefficient_of_variation(&[2.0, 2.0, 2.0]), 0.0);
    }
}
