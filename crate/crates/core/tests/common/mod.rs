//! Dense brute-force constructions of every operator, written directly from
//! the defining formulas without the library's neighborhoods, frames or
//! sparse assembly.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use nldr::{Method, NeighborhoodMode, SampleCloud};

pub const RIDGE: f64 = 1e-3;

fn d2(c: &SampleCloud, i: usize, j: usize) -> f64 {
    (0..c.ambient_dim()).map(|a| (c.points[(i, a)] - c.points[(j, a)]).powi(2)).sum()
}

/// Open neighborhoods and the kernel bandwidth.
pub fn neighbors(c: &SampleCloud, mode: NeighborhoodMode) -> (Vec<Vec<usize>>, f64) {
    let n = c.len();
    match mode {
        NeighborhoodMode::HBall { h } => {
            let nb = (0..n).map(|i| (0..n).filter(|&j| j != i && d2(c, i, j) <= h * h).collect()).collect();
            (nb, h)
        }
        NeighborhoodMode::Knn { k } => {
            let mut radius = 0.0;
            let nb = (0..n)
                .map(|i| {
                    let mut all: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                    all.sort_by(|&a, &b| d2(c, i, a).total_cmp(&d2(c, i, b)).then(a.cmp(&b)));
                    all.truncate(k);
                    radius += d2(c, i, all[k - 1]).sqrt();
                    all.sort_unstable();
                    all
                })
                .collect();
            (nb, radius / n as f64)
        }
    }
}

fn closed(nb: &[Vec<usize>], i: usize) -> Vec<usize> {
    let mut v = nb[i].clone();
    v.push(i);
    v.sort_unstable();
    v
}

/// Rows `x_j - origin` for `j` in `idx`.
fn offsets(c: &SampleCloud, idx: &[usize], origin: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), c.ambient_dim(), |r, a| c.points[(idx[r], a)] - origin[a])
}

/// Top `m` eigenvectors of `XᵀX` as columns.
fn tangent(x: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(x.transpose() * x);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    DMatrix::from_fn(x.ncols(), m, |r, k| eig.eigenvectors[(r, order[k])])
}

/// Projection onto the column space of `a` (full column rank), via `(AᵀA)⁻¹`.
fn projector(a: &DMatrix<f64>) -> DMatrix<f64> {
    let g = (a.transpose() * a).try_inverse().expect("full column rank");
    a * g * a.transpose()
}

fn mean_of(c: &SampleCloud, idx: &[usize]) -> Vec<f64> {
    (0..c.ambient_dim()).map(|a| idx.iter().map(|&j| c.points[(j, a)]).sum::<f64>() / idx.len() as f64).collect()
}

fn weights_to_operator(n: usize, rows: Vec<(Vec<usize>, DVector<f64>)>) -> DMatrix<f64> {
    let mut iw = DMatrix::<f64>::identity(n, n);
    for (i, (cols, w)) in rows.into_iter().enumerate() {
        let w = &w / w.sum();
        for (k, &j) in cols.iter().enumerate() {
            iw[(i, j)] -= w[k];
        }
    }
    iw.transpose() * iw
}

pub fn oracle(method: Method, c: &SampleCloud, mode: NeighborhoodMode, m: usize) -> DMatrix<f64> {
    let n = c.len();
    let (nb, bw) = neighbors(c, mode);
    let gauss = |i: usize, j: usize| (-d2(c, i, j) / (bw * bw)).exp();
    match method {
        Method::DiffusionMaps => {
            let mut l = DMatrix::identity(n, n);
            for i in 0..n {
                let idx = closed(&nb, i);
                let deg: f64 = idx.iter().map(|&j| gauss(i, j)).sum();
                for &j in &idx {
                    l[(i, j)] -= gauss(i, j) / deg;
                }
            }
            l
        }
        Method::LaplacianEigenmaps => {
            let mut l = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    if i != j && (nb[i].contains(&j) || nb[j].contains(&i)) {
                        l[(i, j)] = -gauss(i, j);
                        l[(i, i)] += gauss(i, j);
                    }
                }
            }
            l
        }
        Method::Lle | Method::LdrLle | Method::LdrLlePlus => {
            let rows = (0..n)
                .map(|i| {
                    let x = offsets(c, &nb[i], &c.point(i));
                    let k = x.nrows();
                    let ones = DVector::from_element(k, 1.0);
                    let lambda = RIDGE * x.norm_squared() / k as f64;
                    let w = match method {
                        Method::Lle => (&x * x.transpose() + DMatrix::identity(k, k) * lambda).lu().solve(&ones).unwrap(),
                        _ => {
                            let v = tangent(&x, m);
                            let tau = &x * &v;
                            let p_t = projector(&tau);
                            let normal_part = (DMatrix::identity(k, k) - &p_t) * &ones;
                            if method == Method::LdrLlePlus {
                                normal_part
                            } else {
                                let r = &x - &x * &v * v.transpose();
                                (&r * r.transpose() + DMatrix::identity(k, k) * lambda)
                                    .lu()
                                    .solve(&normal_part)
                                    .unwrap()
                            }
                        }
                    };
                    (nb[i].clone(), w)
                })
                .collect();
            weights_to_operator(n, rows)
        }
        Method::Hlle | Method::Ltsa => {
            let mut l = DMatrix::zeros(n, n);
            for i in 0..n {
                let idx = closed(&nb, i);
                let x = offsets(c, &idx, &mean_of(c, &idx));
                let tau = &x * tangent(&x, m);
                let k = idx.len();
                let block = if method == Method::Ltsa {
                    // I - 11ᵀ/K - projection onto the centered tangent coordinates
                    DMatrix::identity(k, k) - DMatrix::from_element(k, k, 1.0 / k as f64) - projector(&tau)
                } else {
                    let q = m * (m + 1) / 2;
                    let mut b = DMatrix::zeros(k, 1 + m + q);
                    for r in 0..k {
                        b[(r, 0)] = 1.0;
                        let mut col = 1 + m;
                        for a in 0..m {
                            b[(r, 1 + a)] = tau[(r, a)];
                            for bb in a..m {
                                b[(r, col)] = tau[(r, a)] * tau[(r, bb)];
                                col += 1;
                            }
                        }
                    }
                    // Householder QR; the trailing q columns span the quadratic
                    // part orthogonal to the affine functions
                    let qr = b.qr().q();
                    let z = qr.columns(1 + m, q).into_owned();
                    &z * z.transpose()
                };
                for (a, &ia) in idx.iter().enumerate() {
                    for (b2, &ib) in idx.iter().enumerate() {
                        l[(ia, ib)] += block[(a, b2)];
                    }
                }
            }
            l
        }
        Method::LlrLaplacian => {
            let mut l = DMatrix::identity(n, n);
            for i in 0..n {
                let idx = closed(&nb, i);
                let x = offsets(c, &idx, &c.point(i));
                let tau = &x * tangent(&x, m);
                let design = DMatrix::from_fn(idx.len(), m + 1, |r, a| if a == 0 { 1.0 } else { tau[(r, a - 1)] });
                let hat = projector(&design);
                let row = idx.iter().position(|&j| j == i).unwrap();
                for (a, &j) in idx.iter().enumerate() {
                    l[(i, j)] -= hat[(row, a)];
                }
            }
            l
        }
        Method::CoefficientLaplacian => {
            let mut l = DMatrix::zeros(n, n);
            for i in 0..n {
                let idx = closed(&nb, i);
                let x = offsets(c, &idx, &c.point(i));
                let u = &x * tangent(&x, m);
                let row = idx.iter().position(|&j| j == i).unwrap();
                let k = idx.len();
                let mut centering = DMatrix::identity(k, k);
                for r in 0..k {
                    centering[(r, row)] -= 1.0;
                }
                // no-intercept least-squares gradient of f_j - f_i
                let s = (u.transpose() * &u).try_inverse().unwrap() * u.transpose() * centering;
                let block = s.transpose() * s;
                for (a, &ia) in idx.iter().enumerate() {
                    for (b2, &ib) in idx.iter().enumerate() {
                        l[(ia, ib)] += block[(a, b2)];
                    }
                }
            }
            l
        }
    }
}

/// Largest entrywise difference, relative to the largest oracle entry.
pub fn relative_entry_error(a: &DMatrix<f64>, oracle: &DMatrix<f64>) -> f64 {
    (a - oracle).amax() / oracle.amax().max(1.0)
}
