//! Exact neighborhoods and local tangent frames.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::SampleCloud;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum NeighborhoodMode {
    HBall { h: f64 },
    Knn { k: usize },
}

/// Open neighborhoods (the center is never listed), sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodGraph {
    pub neighbors: Vec<Vec<usize>>,
    pub mode: NeighborhoodMode,
    /// Distance from each point to its farthest neighbor.
    pub radius: Vec<f64>,
}

impl NeighborhoodGraph {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Neighbors of `i` together with `i` itself, sorted.
    pub fn closed(&self, i: usize) -> Vec<usize> {
        let nb = &self.neighbors[i];
        let pos = nb.partition_point(|&j| j < i);
        let mut out = Vec::with_capacity(nb.len() + 1);
        out.extend_from_slice(&nb[..pos]);
        out.push(i);
        out.extend_from_slice(&nb[pos..]);
        out
    }

    /// The bandwidth for kernels and scalings: `h` itself for h-balls, the
    /// mean neighbor radius for kNN graphs.
    pub fn bandwidth(&self) -> f64 {
        match self.mode {
            NeighborhoodMode::HBall { h } => h,
            NeighborhoodMode::Knn { .. } => self.radius.iter().sum::<f64>() / self.radius.len().max(1) as f64,
        }
    }

    /// Union symmetrization: `j ~ i` whenever either lists the other.
    pub fn symmetrized(&self) -> Self {
        let mut nb = self.neighbors.clone();
        for (i, list) in self.neighbors.iter().enumerate() {
            for &j in list {
                if self.neighbors[j].binary_search(&i).is_err() {
                    nb[j].push(i);
                }
            }
        }
        for list in &mut nb {
            list.sort_unstable();
            list.dedup();
        }
        Self { neighbors: nb, mode: self.mode, radius: self.radius.clone() }
    }

    pub fn min_size(&self) -> usize {
        self.neighbors.iter().map(Vec::len).min().unwrap_or(0)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn rows(cloud: &SampleCloud) -> Vec<Vec<f64>> {
    (0..cloud.len()).map(|i| cloud.point(i)).collect()
}

/// Exact brute-force neighbor search.
pub fn build_graph(cloud: &SampleCloud, mode: NeighborhoodMode) -> Result<NeighborhoodGraph> {
    let n = cloud.len();
    let pts = rows(cloud);
    match mode {
        NeighborhoodMode::HBall { h } => {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidArgument(format!("bandwidth h must be positive, got {h}")));
            }
            let h2 = h * h;
            let found: Vec<(Vec<usize>, f64, f64)> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut list = Vec::new();
                    let (mut far, mut nearest) = (0.0f64, f64::INFINITY);
                    for j in 0..n {
                        if j == i {
                            continue;
                        }
                        let d2 = sq_dist(&pts[i], &pts[j]);
                        nearest = nearest.min(d2);
                        if d2 <= h2 {
                            list.push(j);
                            far = far.max(d2);
                        }
                    }
                    (list, far.sqrt(), nearest.sqrt())
                })
                .collect();
            if let Some(index) = found.iter().position(|(l, _, _)| l.is_empty()) {
                let min_h = found.iter().map(|f| f.2).fold(0.0, f64::max);
                return Err(Error::IsolatedPoint { index, h, min_h });
            }
            let (neighbors, radius) = found.into_iter().map(|(l, r, _)| (l, r)).unzip();
            Ok(NeighborhoodGraph { neighbors, mode, radius })
        }
        NeighborhoodMode::Knn { k } => {
            if k == 0 || k >= n {
                return Err(Error::InvalidArgument(format!("need 1 <= k < n, got k = {k}, n = {n}")));
            }
            let found: Vec<(Vec<usize>, f64)> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut cand: Vec<(f64, usize)> =
                        (0..n).filter(|&j| j != i).map(|j| (sq_dist(&pts[i], &pts[j]), j)).collect();
                    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    cand.truncate(k);
                    let r = cand.last().map_or(0.0, |c| c.0.sqrt());
                    let mut list: Vec<usize> = cand.into_iter().map(|c| c.1).collect();
                    list.sort_unstable();
                    (list, r)
                })
                .collect();
            let (neighbors, radius) = found.into_iter().unzip();
            Ok(NeighborhoodGraph { neighbors, mode, radius })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    OnPoint,
    OnMean,
}

/// Tangent frame of a closed neighborhood from its SVD.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFrame {
    pub center_index: usize,
    /// Closed neighborhood; row `r` of `tangent_coords` belongs to `members[r]`.
    pub members: Vec<usize>,
    /// Position of the center inside `members`.
    pub center_row: usize,
    /// d × m, orthonormal columns.
    pub tangent_basis: DMatrix<f64>,
    /// |N| × m, the centered neighborhood matrix times `tangent_basis`.
    pub tangent_coords: DMatrix<f64>,
    /// All min(|N|, d) singular values, descending.
    pub singular_values: Vec<f64>,
    pub centering: Centering,
    /// The point subtracted before the SVD.
    pub origin: Vec<f64>,
}

impl LocalFrame {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.tangent_basis.ncols()
    }

    /// Tangent coordinates recentered so the center point sits at the origin.
    pub fn coords_at_center(&self) -> DMatrix<f64> {
        let mut t = self.tangent_coords.clone();
        let c = self.tangent_coords.row(self.center_row).clone_owned();
        for mut row in t.row_iter_mut() {
            row -= &c;
        }
        t
    }
}

/// Flips each column so its largest-magnitude entry is positive.
pub(crate) fn fix_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let mut best = 0usize;
        for (r, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = r;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Singular value decomposition with singular values sorted descending.
pub(crate) fn sorted_svd(a: DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    // nalgebra's SVD loses accuracy on rank-deficient inputs
    let m = faer::Mat::<f64>::from_fn(a.nrows(), a.ncols(), |r, c| a[(r, c)]);
    let svd = m.thin_svd().expect("svd converges");
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&x, &y| s[y].total_cmp(&s[x]));
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let vt = DMatrix::from_fn(order.len(), v.nrows(), |r, c| v[(c, order[r])]);
    (u, order.iter().map(|&k| s[k]).collect(), vt)
}

pub fn local_frame(
    cloud: &SampleCloud,
    graph: &NeighborhoodGraph,
    i: usize,
    m: usize,
    centering: Centering,
) -> Result<LocalFrame> {
    let members = graph.closed(i);
    let center_row = members.binary_search(&i).unwrap();
    let (k, d) = (members.len(), cloud.ambient_dim());
    if m == 0 || m > d {
        return Err(Error::InvalidArgument(format!("frame dimension {m} not in 1..={d}")));
    }
    if k < m + 1 {
        return Err(Error::DegenerateFrame {
            index: i,
            reason: format!("{k} points cannot span {m} dimensions"),
        });
    }
    let origin: Vec<f64> = match centering {
        Centering::OnPoint => cloud.point(i),
        Centering::OnMean => (0..d)
            .map(|c| members.iter().map(|&j| cloud.points[(j, c)]).sum::<f64>() / k as f64)
            .collect(),
    };
    let x = DMatrix::from_fn(k, d, |r, c| cloud.points[(members[r], c)] - origin[c]);
    let (_, s, vt) = sorted_svd(x.clone());
    if s[0] == 0.0 || s.len() < m || s[m - 1] < 1e-12 * s[0] {
        return Err(Error::DegenerateFrame {
            index: i,
            reason: format!("neighborhood has rank below {m}"),
        });
    }
    let mut basis = vt.rows(0, m).transpose();
    fix_signs(&mut basis);
    let coords = &x * &basis;
    Ok(LocalFrame {
        center_index: i,
        members,
        center_row,
        tangent_basis: basis,
        tangent_coords: coords,
        singular_values: s,
        centering,
        origin,
    })
}

/// Frames for every point, computed in parallel and returned in index order.
/// On failure the error of the lowest failing index is reported.
pub fn local_frames(
    cloud: &SampleCloud,
    graph: &NeighborhoodGraph,
    m: usize,
    centering: Centering,
) -> Result<Vec<LocalFrame>> {
    let all: Vec<Result<LocalFrame>> =
        (0..cloud.len()).into_par_iter().map(|i| local_frame(cloud, graph, i, m, centering)).collect();
    all.into_iter().collect()
}
