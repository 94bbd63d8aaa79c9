//! Shift-invert block subspace iteration.
//!
//! `A + σI` is factored once with an envelope Cholesky after reverse
//! Cuthill-McKee reordering; each sweep solves against the current block,
//! re-orthonormalizes and performs a Rayleigh-Ritz projection.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Reverse Cuthill-McKee ordering of the pattern of a symmetric matrix.
/// Returns `perm` with `perm[new] = old`.
pub(crate) fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let adj: Vec<Vec<usize>> = (0..n).map(|i| a.row(i).0.iter().copied().filter(|&j| j != i).collect()).collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    // BFS levels from `start`, restricted to unvisited nodes
    let levels = |start: usize, visited: &[bool]| -> Vec<Vec<usize>> {
        let mut seen = visited.to_vec();
        seen[start] = true;
        let mut out = vec![vec![start]];
        loop {
            let mut next = Vec::new();
            for &u in out.last().unwrap() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                return out;
            }
            out.push(next);
        }
    };

    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)).unwrap();
        // pseudo-peripheral start node
        let mut start = seed;
        let mut ecc = levels(start, &visited).len();
        loop {
            let lv = levels(start, &visited);
            let cand = *lv.last().unwrap().iter().min_by_key(|&&i| (degree[i], i)).unwrap();
            let e = levels(cand, &visited).len();
            if e > ecc {
                start = cand;
                ecc = e;
            } else {
                break;
            }
        }
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut next: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
            next.sort_by_key(|&v| (degree[v], v));
            for v in next {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// Lower-triangular Cholesky factor stored by rows over each row's envelope.
pub(crate) struct EnvelopeCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
    perm: Vec<usize>,
}

impl EnvelopeCholesky {
    /// Factors `P (A + shift I) Pᵀ`; `None` on a nonpositive pivot.
    pub(crate) fn factor(a: &CsrMatrix, perm: &[usize], shift: f64) -> Option<Self> {
        let n = a.nrows();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &j in a.row(old).0 {
                first[new] = first[new].min(inv[j]);
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut values = vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            let (cols, vals) = a.row(old);
            for (&j, &v) in cols.iter().zip(vals) {
                let jn = inv[j];
                if jn <= new {
                    values[start[new] + jn - first[new]] += v;
                }
            }
            values[start[new] + new - first[new]] += shift;
        }
        for i in 0..n {
            let (fi, si) = (first[i], start[i]);
            for j in fi..i {
                let (fj, sj) = (first[j], start[j]);
                let lo = fi.max(fj);
                let mut s = values[si + j - fi];
                for k in lo..j {
                    s -= values[si + k - fi] * values[sj + k - fj];
                }
                values[si + j - fi] = s / values[sj + j - fj];
            }
            let mut d = values[si + i - fi];
            for k in fi..i {
                d -= values[si + k - fi].powi(2);
            }
            if !(d > 0.0) {
                return None;
            }
            values[si + i - fi] = d.sqrt();
        }
        Some(Self { first, start, values, perm: perm.to_vec() })
    }

    /// Solves `(A + shift I) x = b`.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let (fi, si) = (self.first[i], self.start[i]);
            let mut s = y[i];
            for k in fi..i {
                s -= self.values[si + k - fi] * y[k];
            }
            y[i] = s / self.values[si + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            y[i] /= self.values[si + i - fi];
            let xi = y[i];
            for k in fi..i {
                y[k] -= self.values[si + k - fi] * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    #[cfg(test)]
    pub(crate) fn envelope_size(&self) -> usize {
        self.values.len()
    }
}

fn spmm(a: &CsrMatrix, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for c in 0..x.ncols() {
        let col: Vec<f64> = x.column(c).iter().copied().collect();
        let y = a.mul_vec(&col).expect("square");
        out.set_column(c, &DVector::from_vec(y));
    }
    out
}

fn orthonormalize(y: DMatrix<f64>) -> DMatrix<f64> {
    let q = y.qr().q();
    // a second pass repairs the loss of orthogonality from ill-conditioned blocks
    q.qr().q()
}

/// Largest eigenvalue estimate by power iteration.
pub(crate) fn lambda_max(a: &CsrMatrix, seed: u64) -> f64 {
    let n = a.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut est = 0.0;
    for _ in 0..200 {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let w = a.mul_vec(&v).expect("square");
        let rq: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        if (rq - est).abs() <= 1e-6 * rq.abs() {
            return rq;
        }
        est = rq;
        v = w;
    }
    est
}

pub(crate) struct IterativeOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

/// Bottom `k` eigenpairs of the symmetric positive semidefinite `a`.
pub(crate) fn bottom(a: &CsrMatrix, k: usize, opts: &IterativeOptions) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let anorm = a.norm_inf().max(f64::MIN_POSITIVE);
    let perm = reverse_cuthill_mckee(a);
    let mut shift = 1e-9 * anorm;
    let chol = loop {
        if let Some(c) = EnvelopeCholesky::factor(a, &perm, shift) {
            break c;
        }
        shift *= 10.0;
        if shift > anorm {
            return Err(Error::InvalidArgument("matrix is not positive semidefinite".into()));
        }
    };
    let b = (2 * k).max(k + 8).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = orthonormalize(DMatrix::from_fn(n, b, |_, _| rng.random::<f64>() - 0.5));
    let mut worst = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let mut y = DMatrix::zeros(n, b);
        for c in 0..b {
            let col: Vec<f64> = x.column(c).iter().copied().collect();
            y.set_column(c, &DVector::from_vec(chol.solve(&col)));
        }
        let q = orthonormalize(y);
        let aq = spmm(a, &q);
        let t = q.transpose() * &aq;
        let t = (&t + t.transpose()) * 0.5;
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let w = DMatrix::from_fn(b, b, |r, c| eig.eigenvectors[(r, order[c])]);
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        x = &q * &w;
        let ax = &aq * &w;
        worst = (0..k).map(|j| (ax.column(j) - x.column(j) * theta[j]).norm()).fold(0.0, f64::max);
        if worst <= opts.tol * anorm {
            return Ok((theta[..k].to_vec(), x.columns(0, k).into_owned()));
        }
        if iter == opts.max_iter {
            break;
        }
    }
    Err(Error::NotConverged { iterations: opts.max_iter, residual: worst })
}
