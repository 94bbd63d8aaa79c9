use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BiasOperator, Method};
use crate::error::{Error, Result};
use crate::manifold::SampleCloud;
use crate::neighborhoods::NeighborhoodGraph;
use crate::sparse::CsrMatrix;

/// Edge weights for graph Laplacians, truncated to the graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Kernel {
    /// `exp(-d² / width²)`.
    Gaussian { width: f64 },
    /// Unit weight on every edge.
    Constant,
}

impl Kernel {
    fn weight(&self, d2: f64) -> f64 {
        match *self {
            Kernel::Gaussian { width } => (-d2 / (width * width)).exp(),
            Kernel::Constant => 1.0,
        }
    }
}

fn sq_dist(cloud: &SampleCloud, i: usize, j: usize) -> f64 {
    (0..cloud.ambient_dim()).map(|c| (cloud.points[(i, c)] - cloud.points[(j, c)]).powi(2)).sum()
}

/// Kernel rows on the closed neighborhoods, self weight 1.
fn kernel_rows(cloud: &SampleCloud, graph: &NeighborhoodGraph, kernel: Kernel) -> Vec<(Vec<usize>, Vec<f64>)> {
    (0..graph.len())
        .into_par_iter()
        .map(|i| {
            let cols = graph.closed(i);
            let vals = cols.iter().map(|&j| if j == i { 1.0 } else { kernel.weight(sq_dist(cloud, i, j)) }).collect();
            (cols, vals)
        })
        .collect()
}

fn row_normalized(n: usize, rows: &[(Vec<usize>, Vec<f64>)]) -> CsrMatrix {
    let mut t = Vec::new();
    for (i, (cols, vals)) in rows.iter().enumerate() {
        let deg: f64 = vals.iter().sum();
        for (&j, &v) in cols.iter().zip(vals) {
            t.push((i, j, v / deg));
        }
    }
    CsrMatrix::from_triplets(n, n, t)
}

/// Nadaraya-Watson smoother with a Gaussian kernel of width `h`; `L = I - D⁻¹K`.
pub fn diffusion_maps(cloud: &SampleCloud, graph: &NeighborhoodGraph, h: f64) -> Result<BiasOperator> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel width must be positive, got {h}")));
    }
    let n = graph.len();
    let rows = kernel_rows(cloud, graph, Kernel::Gaussian { width: h });
    let s = row_normalized(n, &rows);
    let l = CsrMatrix::identity(n).add_scaled(&s, -1.0)?;
    let mut op = BiasOperator::new(Method::DiffusionMaps, l, h, Some(s));
    op.kernel = Some(Kernel::Gaussian { width: h });
    Ok(op)
}

/// `L = D - K`, with the graph symmetrized by union so `K` is symmetric.
pub fn laplacian_eigenmaps(cloud: &SampleCloud, graph: &NeighborhoodGraph, kernel: Kernel) -> Result<BiasOperator> {
    if let Kernel::Gaussian { width } = kernel {
        if !(width > 0.0) {
            return Err(Error::InvalidArgument(format!("kernel width must be positive, got {width}")));
        }
    }
    let graph = graph.symmetrized();
    let n = graph.len();
    let rows = kernel_rows(cloud, &graph, kernel);
    let mut t = Vec::new();
    for (i, (cols, vals)) in rows.iter().enumerate() {
        let mut deg = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            if j != i {
                t.push((i, j, -v));
                deg += v;
            }
        }
        t.push((i, i, deg));
    }
    let l = CsrMatrix::from_triplets(n, n, t);
    let s = row_normalized(n, &rows);
    let h = match kernel {
        Kernel::Gaussian { width } => width,
        Kernel::Constant => graph.bandwidth(),
    };
    let mut op = BiasOperator::new(Method::LaplacianEigenmaps, l, h, Some(s));
    op.kernel = Some(kernel);
    Ok(op)
}
