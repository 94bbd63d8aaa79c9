use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{assemble_blocks, check_frames, gram_schmidt, identity_minus, BiasOperator, Method};
use crate::error::{Error, Result};
use crate::neighborhoods::{sorted_svd, LocalFrame, NeighborhoodGraph};

const PINV_CUTOFF: f64 = 1e-10;

/// `[1, τ_1..τ_m, τ_a τ_b (a ≤ b)]` on the rows of `tau`.
fn quadratic_design(tau: &DMatrix<f64>) -> DMatrix<f64> {
    let (k, m) = tau.shape();
    let q = m * (m + 1) / 2;
    let mut b = DMatrix::zeros(k, 1 + m + q);
    for r in 0..k {
        b[(r, 0)] = 1.0;
        let mut c = 1 + m;
        for a in 0..m {
            b[(r, 1 + a)] = tau[(r, a)];
            for bb in a..m {
                b[(r, c)] = tau[(r, a)] * tau[(r, bb)];
                c += 1;
            }
        }
    }
    b
}

fn affine_design(tau: &DMatrix<f64>) -> DMatrix<f64> {
    let (k, m) = tau.shape();
    DMatrix::from_fn(k, m + 1, |r, c| if c == 0 { 1.0 } else { tau[(r, c - 1)] })
}

fn hlle_block(f: &LocalFrame) -> Result<DMatrix<f64>> {
    let m = f.dim();
    let need = 1 + m + m * (m + 1) / 2;
    if f.len() < need {
        return Err(Error::DegenerateFrame {
            index: f.center_index,
            reason: format!("{} points, quadratic fit needs {need}", f.len()),
        });
    }
    let z = gram_schmidt(quadratic_design(&f.tangent_coords))
        .map_err(|column| Error::DegenerateQuadraticFrame { index: f.center_index, column })?;
    let zq = z.columns(1 + m, need - 1 - m);
    Ok(&zq * zq.transpose())
}

fn ltsa_block(f: &LocalFrame) -> Result<DMatrix<f64>> {
    let k = f.len();
    let z = gram_schmidt(affine_design(&f.tangent_coords)).map_err(|_| Error::DegenerateFrame {
        index: f.center_index,
        reason: "tangent coordinates are rank deficient".into(),
    })?;
    Ok(DMatrix::identity(k, k) - &z * z.transpose())
}

/// Pseudo-inverse with a relative singular value cutoff; `None` if any
/// singular value falls below the cutoff.
fn full_rank_pinv(a: DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (u, s, vt) = sorted_svd(a);
    if s.is_empty() || s[s.len() - 1] <= PINV_CUTOFF * s[0] {
        return None;
    }
    let inv = DVector::from_iterator(s.len(), s.iter().map(|v| 1.0 / v));
    Some(vt.transpose() * DMatrix::from_diagonal(&inv) * u.transpose())
}

fn llr_row(f: &LocalFrame) -> Result<Vec<f64>> {
    let b = affine_design(&f.coords_at_center());
    let pinv = full_rank_pinv(b).ok_or_else(|| Error::DegenerateFrame {
        index: f.center_index,
        reason: "singular local linear design".into(),
    })?;
    Ok(pinv.row(0).iter().copied().collect())
}

/// Gradient map `S = (ŨᵀŨ)⁻¹ Ũᵀ (I - 1 e_iᵀ)`, an `m × |N|` matrix.
pub(crate) fn coefficient_map(f: &LocalFrame) -> Result<DMatrix<f64>> {
    let u = f.coords_at_center();
    let pinv = full_rank_pinv(u).ok_or_else(|| Error::DegenerateFrame {
        index: f.center_index,
        reason: "singular tangent Gram matrix".into(),
    })?;
    let mut s = pinv;
    let row_sums: Vec<f64> = s.row_iter().map(|r| r.sum()).collect();
    for (a, rs) in row_sums.into_iter().enumerate() {
        s[(a, f.center_row)] -= rs;
    }
    Ok(s)
}

fn block_operator(
    method: Method,
    graph: &NeighborhoodGraph,
    frames: &[LocalFrame],
    block: impl Fn(&LocalFrame) -> Result<DMatrix<f64>> + Sync,
) -> Result<BiasOperator> {
    check_frames(graph, frames, None)?;
    let blocks: Vec<Result<(Vec<usize>, DMatrix<f64>)>> =
        frames.par_iter().map(|f| Ok((f.members.clone(), block(f)?))).collect();
    let blocks = blocks.into_iter().collect::<Result<Vec<_>>>()?;
    let l = assemble_blocks(graph.len(), blocks);
    Ok(BiasOperator::new(method, l, graph.bandwidth(), None))
}

/// Sum of `Z̃ Z̃ᵀ` over neighborhoods, where `Z̃` holds the orthonormalized
/// quadratic monomials of the tangent coordinates with the affine part removed.
pub fn hlle(graph: &NeighborhoodGraph, frames: &[LocalFrame]) -> Result<BiasOperator> {
    block_operator(Method::Hlle, graph, frames, hlle_block)
}

/// Sum of `I - P_i`, with `P_i` the projection onto `span{1, τ}`.
pub fn ltsa(graph: &NeighborhoodGraph, frames: &[LocalFrame]) -> Result<BiasOperator> {
    block_operator(Method::Ltsa, graph, frames, ltsa_block)
}

/// `L = I - S` where row `i` of `S` evaluates at `X_i` the local linear fit
/// on tangent coordinates over the closed neighborhood.
pub fn llr_laplacian(graph: &NeighborhoodGraph, frames: &[LocalFrame]) -> Result<BiasOperator> {
    check_frames(graph, frames, None)?;
    let rows: Vec<Result<(Vec<usize>, Vec<f64>)>> =
        frames.par_iter().map(|f| Ok((f.members.clone(), llr_row(f)?))).collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let (l, s) = identity_minus(graph.len(), &rows);
    Ok(BiasOperator::new(Method::LlrLaplacian, l, graph.bandwidth(), Some(s)))
}

/// Sum of `SᵀS` over the local gradient maps of [`coefficient_map`].
pub fn coefficient_laplacian(graph: &NeighborhoodGraph, frames: &[LocalFrame]) -> Result<BiasOperator> {
    block_operator(Method::CoefficientLaplacian, graph, frames, |f| {
        let s = coefficient_map(f)?;
        Ok(s.transpose() * s)
    })
}
