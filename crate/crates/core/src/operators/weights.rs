use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_frames, identity_minus, BiasOperator, Method};
use crate::error::{Error, Result};
use crate::manifold::SampleCloud;
use crate::neighborhoods::{sorted_svd, Centering, LocalFrame, NeighborhoodGraph};

/// Ridge added to the local Gram matrix of LLE-type reconstructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Ridge {
    /// `λ = c · trace(X̃X̃ᵀ) / |Ñ|` for each neighborhood.
    Relative(f64),
    Absolute(f64),
}

impl Default for Ridge {
    fn default() -> Self {
        Ridge::Relative(1e-3)
    }
}

impl Ridge {
    fn value(&self, trace: f64, k: usize) -> f64 {
        match *self {
            Ridge::Relative(c) => c * trace / k as f64,
            Ridge::Absolute(l) => l,
        }
    }

    fn check(&self) -> Result<()> {
        let v = match *self {
            Ridge::Relative(c) | Ridge::Absolute(c) => c,
        };
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("ridge must be nonnegative, got {v}")))
        }
    }
}

/// Differences `X_j - X_i` over the open neighborhood, one row per neighbor.
fn offsets(cloud: &SampleCloud, graph: &NeighborhoodGraph, i: usize) -> DMatrix<f64> {
    let nb = &graph.neighbors[i];
    DMatrix::from_fn(nb.len(), cloud.ambient_dim(), |r, c| cloud.points[(nb[r], c)] - cloud.points[(i, c)])
}

fn normalize(index: usize, w: DVector<f64>) -> Result<Vec<f64>> {
    let s = w.sum();
    if !(s.abs() >= 1e-12 * w.len() as f64) {
        return Err(Error::DegenerateWeights { index, normalizer: s });
    }
    Ok(w.iter().map(|v| v / s).collect())
}

/// `w ← w - Σ_j c_j u_j (u_jᵀ 1)` over the columns `u_j` of `u`.
fn shrink(w: &mut DVector<f64>, u: &DMatrix<f64>, coef: impl Fn(usize) -> f64) {
    for j in 0..u.ncols() {
        let c = coef(j);
        if c != 0.0 {
            let proj = u.column(j).sum();
            w.axpy(-c * proj, &u.column(j), 1.0);
        }
    }
}

fn lle_row(cloud: &SampleCloud, graph: &NeighborhoodGraph, i: usize, ridge: Ridge) -> Result<Vec<f64>> {
    let x = offsets(cloud, graph, i);
    let k = x.nrows();
    let (u, s, _) = sorted_svd(x);
    let trace: f64 = s.iter().map(|v| v * v).sum();
    let lambda = ridge.value(trace, k);
    let tol = 1e-10 * s.first().copied().unwrap_or(0.0);
    let w = if lambda > 0.0 {
        // (G + λI)⁻¹1 up to the factor 1/λ, which the normalization removes
        let mut w = DVector::from_element(k, 1.0);
        shrink(&mut w, &u, |j| s[j] * s[j] / (s[j] * s[j] + lambda));
        w
    } else {
        let rank = s.iter().filter(|&&v| v > tol).count();
        if rank < k {
            return Err(Error::SingularGram { index: i });
        }
        // G = U Σ² Uᵀ with U square
        let ut1 = u.transpose() * DVector::from_element(k, 1.0);
        let scaled = DVector::from_fn(k, |j, _| ut1[j] / (s[j] * s[j]));
        &u * scaled
    };
    normalize(i, w)
}

/// Tangent part of the open neighborhood: `τ / σ` (orthonormal columns) and
/// the residual `X̃ (I - V Vᵀ)` orthogonal to the tangent space.
fn split_tangent(cloud: &SampleCloud, graph: &NeighborhoodGraph, frame: &LocalFrame) -> (DMatrix<f64>, DMatrix<f64>) {
    let i = frame.center_index;
    let x = offsets(cloud, graph, i);
    let m = frame.dim();
    let mut tau = frame.tangent_coords.clone().remove_row(frame.center_row);
    for c in 0..m {
        let norm = tau.column(c).norm();
        tau.column_mut(c).unscale_mut(norm);
    }
    let v = &frame.tangent_basis;
    let resid = &x - &x * v * v.transpose();
    (tau, resid)
}

pub fn lle(cloud: &SampleCloud, graph: &NeighborhoodGraph, ridge: Ridge) -> Result<BiasOperator> {
    ridge.check()?;
    let rows: Vec<Result<(Vec<usize>, Vec<f64>)>> = (0..graph.len())
        .into_par_iter()
        .map(|i| Ok((graph.neighbors[i].clone(), lle_row(cloud, graph, i, ridge)?)))
        .collect();
    finish(Method::Lle, graph, rows)
}

/// LLE weights with the ridge restricted to directions orthogonal to the
/// tangent space: `w ∝ (I - U_m U_mᵀ) 1 - Σ_{j>m} σ_j²/(σ_j² + λ) u_j u_jᵀ 1`.
/// Tangent coordinates are reconstructed exactly.
pub fn ldr_lle(
    cloud: &SampleCloud,
    graph: &NeighborhoodGraph,
    frames: &[LocalFrame],
    ridge: Ridge,
) -> Result<BiasOperator> {
    ridge.check()?;
    check_frames(graph, frames, Some(Centering::OnPoint))?;
    let rows: Vec<Result<(Vec<usize>, Vec<f64>)>> = frames
        .par_iter()
        .map(|f| {
            let i = f.center_index;
            let (tau, resid) = split_tangent(cloud, graph, f);
            let k = tau.nrows();
            let trace: f64 = f.singular_values.iter().map(|v| v * v).sum();
            let lambda = ridge.value(trace, k);
            let mut w = DVector::from_element(k, 1.0);
            shrink(&mut w, &tau, |_| 1.0);
            let (u, s, _) = sorted_svd(resid);
            let tol = 1e-10 * f.singular_values[0];
            shrink(&mut w, &u, |j| {
                if s[j] <= tol {
                    0.0
                } else if lambda > 0.0 {
                    s[j] * s[j] / (s[j] * s[j] + lambda)
                } else {
                    1.0
                }
            });
            Ok((graph.neighbors[i].clone(), normalize(i, w)?))
        })
        .collect();
    finish(Method::LdrLle, graph, rows)
}

/// `w ∝ 1 - U_m U_mᵀ 1`.
pub fn ldr_lle_plus(cloud: &SampleCloud, graph: &NeighborhoodGraph, frames: &[LocalFrame]) -> Result<BiasOperator> {
    check_frames(graph, frames, Some(Centering::OnPoint))?;
    let rows: Vec<Result<(Vec<usize>, Vec<f64>)>> = frames
        .par_iter()
        .map(|f| {
            let i = f.center_index;
            let (tau, _) = split_tangent(cloud, graph, f);
            let mut w = DVector::from_element(tau.nrows(), 1.0);
            shrink(&mut w, &tau, |_| 1.0);
            Ok((graph.neighbors[i].clone(), normalize(i, w)?))
        })
        .collect();
    finish(Method::LdrLlePlus, graph, rows)
}

fn finish(method: Method, graph: &NeighborhoodGraph, rows: Vec<Result<(Vec<usize>, Vec<f64>)>>) -> Result<BiasOperator> {
    let rows: Vec<(Vec<usize>, Vec<f64>)> = rows.into_iter().collect::<Result<_>>()?;
    let n = graph.len();
    let (i_minus_w, w) = identity_minus(n, &rows);
    let l = i_minus_w.transpose().matmul(&i_minus_w)?;
    Ok(BiasOperator::new(method, l, graph.bandwidth(), Some(w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{lattice_manifold, ManifoldSpec};
    use crate::neighborhoods::{build_graph, local_frames, NeighborhoodMode};

    #[test]
    fn lattice_weights_are_uniform() {
        let cloud = lattice_manifold(&ManifoldSpec::rectangle(1.0, 1.0), &[21, 21]).unwrap();
        let g = build_graph(&cloud, NeighborhoodMode::HBall { h: 0.16 }).unwrap();
        let op = lle(&cloud, &g, Ridge::default()).unwrap();
        let w = op.smoother.unwrap();
        for i in cloud.interior(0.16 + 1e-9) {
            let (_, vals) = w.row(i);
            let uniform = 1.0 / vals.len() as f64;
            assert!(vals.iter().all(|v| (v - uniform).abs() < 1e-6));
        }
    }

    #[test]
    fn exact_gram_is_singular_when_k_exceeds_d() {
        let cloud = crate::sample_manifold(&ManifoldSpec::segment(0.0, 1.0), 40, 1).unwrap();
        let g = build_graph(&cloud, NeighborhoodMode::Knn { k: 3 }).unwrap();
        assert!(matches!(lle(&cloud, &g, Ridge::Absolute(0.0)), Err(Error::SingularGram { .. })));
    }

    #[test]
    fn ldr_reconstructs_tangent_coordinates() {
        let spec = ManifoldSpec::rectangle(1.0, 1.0).with_ambient_dim(3);
        let cloud = crate::sample_manifold(&spec, 300, 8).unwrap();
        let g = build_graph(&cloud, NeighborhoodMode::HBall { h: 0.2 }).unwrap();
        let frames = local_frames(&cloud, &g, 2, Centering::OnPoint).unwrap();
        for op in [ldr_lle(&cloud, &g, &frames, Ridge::default()).unwrap(), ldr_lle_plus(&cloud, &g, &frames).unwrap()] {
            let w = op.smoother.unwrap();
            for f in frames.iter().step_by(7) {
                let (cols, vals) = w.row(f.center_index);
                assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                for c in 0..2 {
                    let recon: f64 = cols
                        .iter()
                        .zip(vals)
                        .map(|(&j, &v)| v * f.tangent_coords[(f.members.binary_search(&j).unwrap(), c)])
                        .sum();
                    assert!(recon.abs() < 1e-8, "{recon}");
                }
            }
        }
    }
}
