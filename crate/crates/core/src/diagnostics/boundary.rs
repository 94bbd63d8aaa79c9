//! Boundary conditions read off eigenfunctions near the boundary.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hessian::{estimate_hessian, HessianEstimate};
use super::Provenance;
use crate::error::{Error, Result};
use crate::manifold::SampleCloud;
use crate::neighborhoods::sorted_svd;
use crate::spectral::Embedding;

/// Eigenfunctions with `|Δf|` below this fraction of `‖H‖_F` are skipped when
/// averaging `f₁₁ / Δf`.
const LAPLACIAN_FLOOR: f64 = 0.1;
/// Eigenfunctions whose Hessian norm is below this fraction of the largest
/// one at the same point are treated as flat there.
const FLATNESS_FLOOR: f64 = 0.05;

/// Columns of an embedding that are not in the near-null space.
fn non_null_columns(e: &Embedding) -> std::ops::Range<usize> {
    let skip = if e.dropped_trivial { e.null_dim.saturating_sub(1) } else { 0 };
    skip.min(e.p())..e.p()
}

/// Points closest to each boundary face, at most `per_face` per face, skipping
/// points within `corner_margin` of a second face.
pub fn boundary_points(cloud: &SampleCloud, per_face: usize, corner_margin: f64) -> Vec<usize> {
    let faces: Vec<Vec<f64>> = (0..cloud.len())
        .map(|i| cloud.spec.boundary_faces(&cloud.chart(i)).into_iter().map(|f| f.0).collect())
        .collect();
    let nfaces = faces.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for face in 0..nfaces {
        let mut cand: Vec<(f64, usize)> = (0..cloud.len())
            .filter(|&i| {
                let d = faces[i][face];
                faces[i].iter().enumerate().all(|(g, &e)| g == face || (e > d && e >= corner_margin))
            })
            .map(|i| (faces[i][face], i))
            .collect();
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out.extend(cand.into_iter().take(per_face).map(|c| c.1));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub point: usize,
    pub boundary_dist: f64,
    pub bandwidth: f64,
    /// Embedding columns used, one row of `hessians` each.
    pub columns: Vec<usize>,
    /// `(f₁₁, f₂₂, f₁₂)` per eigenfunction; axis 1 is the inward normal.
    pub hessians: Vec<[f64; 3]>,
    pub fit_residuals: Vec<f64>,
    /// Singular values of the stacked Hessians, descending.
    pub singular_values: Vec<f64>,
    pub right_singular_vectors: Vec<[f64; 3]>,
    /// Unit vector in the span of the top two right singular vectors with
    /// zero mixed derivative and positive `f₁₁`.
    pub representative: [f64; 3],
    /// Columns entering the ratio average.
    pub included: Vec<usize>,
    /// Mean of `f₁₁ / Δf` over the included columns.
    pub ratio: f64,
    /// `(m + 1) / 2`.
    pub predicted_ratio: f64,
    pub provenance: Provenance,
}

impl BoundaryReport {
    pub fn singular_ratio(&self) -> f64 {
        self.singular_values[2] / self.singular_values[0]
    }
}

/// Hessians of the eigenfunctions at a boundary point, their SVD and the
/// mean ratio `f₁₁ / Δf`, which a second-order boundary condition fixes.
pub fn boundary_condition_check(
    cloud: &SampleCloud,
    embedding: &Embedding,
    point: usize,
    bandwidth: f64,
) -> Result<BoundaryReport> {
    let m = cloud.intrinsic_dim();
    if m != 2 {
        return Err(Error::InvalidArgument(format!("boundary check needs m = 2, got {m}")));
    }
    if embedding.n() != cloud.len() {
        return Err(Error::DimensionMismatch { expected: cloud.len(), got: embedding.n() });
    }
    let dist = cloud.boundary_dist.get(point).copied().flatten().ok_or_else(|| {
        Error::InvalidArgument(format!("point {point} has no boundary distance"))
    })?;
    if dist > 0.1 * bandwidth {
        return Err(Error::InvalidArgument(format!(
            "point {point} is {dist} from the boundary, more than a tenth of the bandwidth"
        )));
    }
    let columns: Vec<usize> = non_null_columns(embedding).collect();
    if columns.len() < 5 {
        return Err(Error::InvalidArgument(format!("need at least 5 eigenfunctions, got {}", columns.len())));
    }
    let ests: Vec<HessianEstimate> = columns
        .iter()
        .map(|&c| estimate_hessian(cloud, &embedding.column(c), point, bandwidth))
        .collect::<Result<_>>()?;
    let hessians: Vec<[f64; 3]> = ests.iter().map(|e| [e.h(0, 0), e.h(1, 1), e.h(0, 1)]).collect();
    let norms: Vec<f64> = ests.iter().map(HessianEstimate::frobenius).collect();
    let biggest = norms.iter().copied().fold(0.0, f64::max);

    let mut included = Vec::new();
    let mut ratios = Vec::new();
    for (k, e) in ests.iter().enumerate() {
        let lap = e.laplacian();
        if norms[k] >= FLATNESS_FLOOR * biggest && lap.abs() >= LAPLACIAN_FLOOR * norms[k] && lap != 0.0 {
            included.push(columns[k]);
            ratios.push(e.h(0, 0) / lap);
        }
    }
    if ratios.is_empty() {
        return Err(Error::Inconclusive(format!("every eigenfunction is harmonic or flat at point {point}")));
    }
    let ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;

    let mat = DMatrix::from_fn(hessians.len(), 3, |r, c| hessians[r][c]);
    let (_, s, vt) = sorted_svd(mat);
    let mut sv = s.clone();
    sv.resize(3, 0.0);
    let rsv: Vec<[f64; 3]> = (0..vt.nrows()).map(|r| [vt[(r, 0)], vt[(r, 1)], vt[(r, 2)]]).collect();
    let representative = representative(&rsv);

    Ok(BoundaryReport {
        point,
        boundary_dist: dist,
        bandwidth,
        columns,
        hessians,
        fit_residuals: ests.iter().map(|e| e.fit_residual).collect(),
        singular_values: sv,
        right_singular_vectors: rsv,
        representative,
        included,
        ratio,
        predicted_ratio: (m as f64 + 1.0) / 2.0,
        provenance: Provenance::of(cloud, embedding.h, &[embedding.method]),
    })
}

fn representative(rsv: &[[f64; 3]]) -> [f64; 3] {
    let (v1, v2) = (rsv[0], rsv.get(1).copied().unwrap_or([0.0; 3]));
    let (mut a, mut b) = (v2[2], -v1[2]);
    let norm = a.hypot(b);
    if norm < 1e-12 {
        a = 1.0;
        b = 0.0;
    } else {
        a /= norm;
        b /= norm;
    }
    let mut x = [a * v1[0] + b * v2[0], a * v1[1] + b * v2[1], a * v1[2] + b * v2[2]];
    if x[0] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    x
}

/// Mean Hessian values over many boundary points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTable {
    pub f11_mean: f64,
    pub f22_mean: f64,
    pub f12_mean: f64,
    pub laplacian_mean: f64,
    /// `(m + 1) / 2 · laplacian_mean`.
    pub predicted_f11: f64,
    /// Mean over points of the per-point ratio `f₁₁ / Δf`.
    pub ratio_mean: f64,
    pub predicted_ratio: f64,
    /// Mean over points of the bottom-to-top singular value ratio.
    pub singular_ratio_mean: f64,
    /// Mean over points of the bottom right singular vector, signed so that
    /// its first entry is positive. It is normal to the plane the Hessians
    /// lie in.
    pub bottom_vector_mean: [f64; 3],
    /// `b₁ / (b₁ + b₂)` of `bottom_vector_mean`.
    pub bottom_vector_ratio: f64,
    pub points: Vec<usize>,
    /// Points skipped because every eigenfunction was flat there.
    pub inconclusive: Vec<usize>,
    pub eigenfunctions: usize,
    pub reports: Vec<BoundaryReport>,
    pub provenance: Provenance,
}

pub fn boundary_table(
    cloud: &SampleCloud,
    embedding: &Embedding,
    bandwidth: f64,
    per_face: usize,
    corner_margin: f64,
) -> Result<BoundaryTable> {
    let points = boundary_points(cloud, per_face, corner_margin);
    let results: Vec<(usize, Result<BoundaryReport>)> = points
        .par_iter()
        .map(|&i| (i, boundary_condition_check(cloud, embedding, i, bandwidth)))
        .collect();
    let mut reports = Vec::new();
    let mut inconclusive = Vec::new();
    for (i, r) in results {
        match r {
            Ok(r) => reports.push(r),
            Err(Error::Inconclusive(_)) => inconclusive.push(i),
            Err(e) => return Err(e),
        }
    }
    if reports.is_empty() {
        return Err(Error::Inconclusive("no boundary point gave a usable ratio".into()));
    }
    let k = reports.len() as f64;
    let mean = |f: &dyn Fn(&BoundaryReport) -> f64| reports.iter().map(f).sum::<f64>() / k;
    let f11 = mean(&|r| r.representative[0]);
    let f22 = mean(&|r| r.representative[1]);
    let f12 = mean(&|r| r.representative[2]);
    let predicted_ratio = reports[0].predicted_ratio;
    let mut bottom = [0.0; 3];
    for r in &reports {
        let v = r.right_singular_vectors.get(2).copied().unwrap_or([0.0; 3]);
        let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
        (0..3).for_each(|a| bottom[a] += sign * v[a] / k);
    }
    Ok(BoundaryTable {
        f11_mean: f11,
        f22_mean: f22,
        f12_mean: f12,
        laplacian_mean: f11 + f22,
        predicted_f11: predicted_ratio * (f11 + f22),
        ratio_mean: mean(&|r| r.ratio),
        predicted_ratio,
        singular_ratio_mean: mean(&BoundaryReport::singular_ratio),
        bottom_vector_mean: bottom,
        bottom_vector_ratio: bottom[0] / (bottom[0] + bottom[1]),
        points,
        inconclusive,
        eigenfunctions: reports[0].columns.len(),
        reports,
        provenance: Provenance::of(cloud, embedding.h, &[embedding.method]),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannReport {
    pub points: Vec<usize>,
    pub columns: Vec<usize>,
    pub bandwidth: f64,
    /// `∂f/∂η` per point (rows) and eigenfunction (columns).
    pub normal_derivative: Vec<Vec<f64>>,
    /// Norm of the tangential part of the gradient.
    pub tangential: Vec<Vec<f64>>,
    pub gradient_norm: Vec<Vec<f64>>,
    /// Largest gradient norm of each eigenfunction over the whole cloud.
    pub max_gradient: Vec<f64>,
    /// `max |∂f/∂η| / max_gradient` over points and eigenfunctions.
    pub normal_to_max: f64,
    /// `Σ |∂f/∂η| / Σ |∇_T f|`; `None` when m = 1.
    pub normal_to_tangential: Option<f64>,
    /// `Σ |∂f/∂η| / Σ |∇f|`.
    pub normal_fraction: f64,
    pub provenance: Provenance,
}

/// Normal and tangential derivatives of eigenfunctions at boundary points,
/// from local quadratic fits.
pub fn neumann_boundary_check(
    cloud: &SampleCloud,
    embedding: &Embedding,
    points: &[usize],
    bandwidth: f64,
) -> Result<NeumannReport> {
    if embedding.n() != cloud.len() {
        return Err(Error::DimensionMismatch { expected: cloud.len(), got: embedding.n() });
    }
    if points.is_empty() {
        return Err(Error::InvalidArgument("no boundary points given".into()));
    }
    for &i in points {
        if cloud.boundary_dist.get(i).copied().flatten().is_none() {
            return Err(Error::InvalidArgument(format!("point {i} has no boundary")));
        }
    }
    let columns: Vec<usize> = non_null_columns(embedding).collect();
    let m = cloud.intrinsic_dim();
    let mut normal = vec![vec![0.0; columns.len()]; points.len()];
    let mut tangential = vec![vec![0.0; columns.len()]; points.len()];
    let mut grad = vec![vec![0.0; columns.len()]; points.len()];
    let mut max_gradient = Vec::with_capacity(columns.len());
    for (c, &col) in columns.iter().enumerate() {
        let f = embedding.column(col);
        for (r, &i) in points.iter().enumerate() {
            let g = estimate_hessian(cloud, &f, i, bandwidth)?.gradient;
            normal[r][c] = g[0];
            tangential[r][c] = g[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            grad[r][c] = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        }
        let all: Vec<f64> = (0..cloud.len())
            .into_par_iter()
            .map(|i| match estimate_hessian(cloud, &f, i, bandwidth) {
                Ok(e) => e.gradient.iter().map(|v| v * v).sum::<f64>().sqrt(),
                Err(_) => 0.0,
            })
            .collect();
        max_gradient.push(all.into_iter().fold(0.0, f64::max));
    }
    let mut normal_to_max = 0.0f64;
    let (mut sn, mut st, mut sg) = (0.0, 0.0, 0.0);
    for r in 0..points.len() {
        for c in 0..columns.len() {
            normal_to_max = normal_to_max.max(normal[r][c].abs() / max_gradient[c]);
            sn += normal[r][c].abs();
            st += tangential[r][c];
            sg += grad[r][c];
        }
    }
    Ok(NeumannReport {
        points: points.to_vec(),
        columns,
        bandwidth,
        normal_derivative: normal,
        tangential,
        gradient_norm: grad,
        max_gradient,
        normal_to_max,
        normal_to_tangential: if m > 1 { Some(sn / st) } else { None },
        normal_fraction: sn / sg,
        provenance: Provenance::of(cloud, embedding.h, &[embedding.method]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{lattice_manifold, ManifoldSpec};
    use crate::operators::Method;

    fn fake_embedding(cloud: &SampleCloud, funcs: &[&dyn Fn(&[f64]) -> f64]) -> Embedding {
        let coords = DMatrix::from_fn(cloud.len(), funcs.len(), |i, c| funcs[c](&cloud.chart(i)));
        Embedding {
            coords,
            spectrum: vec![1.0; funcs.len()],
            method: Method::Ltsa,
            h: 0.1,
            scale_exponent: -4,
            dropped_trivial: false,
            trivial_eigenvalue: None,
            null_dim: 0,
            lambda_max: 1.0,
            clusters: Vec::new(),
        }
    }

    #[test]
    fn constructed_rank_deficiency() {
        // on the face u₂ = 0 the normal is u₂; every function below has
        // f₂₂ = 1.5 (f₁₁ + f₂₂), i.e. f₁₁ = -f₂₂ / 3
        let cloud = lattice_manifold(&ManifoldSpec::rectangle(1.0, 1.0), &[41, 41]).unwrap();
        let funcs: [&dyn Fn(&[f64]) -> f64; 5] = [
            &|u| 3.0 * u[1] * u[1] - u[0] * u[0],
            &|u| 3.0 * u[1] * u[1] - u[0] * u[0] + u[0] * u[1],
            &|u| 2.0 * u[0] * u[1] + u[0],
            &|u| -6.0 * u[1] * u[1] + 2.0 * u[0] * u[0] + 0.3 * u[1],
            &|u| 0.5 * u[0] * u[1] + 1.5 * u[1] * u[1] - 0.5 * u[0] * u[0],
        ];
        let e = fake_embedding(&cloud, &funcs);
        let i = (0..cloud.len()).find(|&i| cloud.chart(i) == vec![0.5, 0.0]).unwrap();
        let r = boundary_condition_check(&cloud, &e, i, 0.2).unwrap();
        assert!(r.singular_values[2] <= 1e-8 * r.singular_values[0], "{:?}", r.singular_values);
        assert!((r.ratio - 1.5).abs() < 1e-8);
        let scaled = Embedding { coords: &e.coords * 10.0, ..e.clone() };
        let r10 = boundary_condition_check(&cloud, &scaled, i, 0.2).unwrap();
        assert!((r10.ratio - r.ratio).abs() < 1e-10);
    }

    #[test]
    fn harmonic_functions_are_inconclusive() {
        let cloud = lattice_manifold(&ManifoldSpec::rectangle(1.0, 1.0), &[41, 41]).unwrap();
        let funcs: [&dyn Fn(&[f64]) -> f64; 5] =
            [&|u| u[0] * u[1], &|u| u[0] * u[0] - u[1] * u[1], &|u| u[0], &|u| 2.0 * u[0] * u[1], &|u| u[1]];
        let e = fake_embedding(&cloud, &funcs);
        let i = (0..cloud.len()).find(|&i| cloud.chart(i) == vec![0.5, 0.0]).unwrap();
        assert!(matches!(boundary_condition_check(&cloud, &e, i, 0.2), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn boundary_points_skip_corners() {
        let cloud = lattice_manifold(&ManifoldSpec::rectangle(1.0, 1.0), &[21, 21]).unwrap();
        let pts = boundary_points(&cloud, 10, 0.2);
        assert_eq!(pts.len(), 40);
        for &i in &pts {
            let u = cloud.chart(i);
            let near = [u[0], 1.0 - u[0], u[1], 1.0 - u[1]].iter().filter(|&&d| d < 0.2).count();
            assert_eq!(near, 1);
            assert_eq!(cloud.boundary_dist[i], Some(0.0));
        }
    }

    #[test]
    fn cosine_satisfies_neumann() {
        let cloud = lattice_manifold(&ManifoldSpec::segment(0.0, 1.0), &[401]).unwrap();
        let e = fake_embedding(&cloud, &[&|u| (std::f64::consts::PI * u[0]).cos(), &|u| u[0]]);
        let r = neumann_boundary_check(&cloud, &e, &[0, 400], 0.05).unwrap();
        assert!(r.normal_derivative.iter().all(|row| row[0].abs() < 1e-2));
        assert!((r.normal_derivative[0][1] - 1.0).abs() < 1e-8 && (r.normal_derivative[1][1] + 1.0).abs() < 1e-8);
        assert!(r.normal_to_tangential.is_none());
    }
}
