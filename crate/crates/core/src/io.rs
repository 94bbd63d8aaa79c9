//! CSV data files with JSON sidecars.
//!
//! * clouds: columns `x_1..x_d, u_1..u_m, boundary_dist`, where a missing
//!   boundary is written as `none`;
//! * operators: coordinate triplets `row, col, value`;
//! * embeddings: columns `e_1..e_p`.
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces the values bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{ManifoldSpec, SampleCloud, Sampling};
use crate::operators::{BiasOperator, Method};
use crate::sparse::CsrMatrix;
use crate::spectral::Embedding;

pub const NO_BOUNDARY: &str = "none";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudMeta {
    pub spec: ManifoldSpec,
    pub seed: u64,
    pub sampling: Sampling,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub method: Method,
    pub n: usize,
    pub nnz: usize,
    pub symmetric: bool,
    pub psd: bool,
    pub smoother_order: u32,
    pub scale_exponent: i32,
    pub stable: bool,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl OperatorMeta {
    pub fn of(op: &BiasOperator) -> Self {
        Self {
            method: op.method,
            n: op.n(),
            nnz: op.l.nnz(),
            symmetric: op.symmetric,
            psd: op.psd_claimed,
            smoother_order: op.smoother_order,
            scale_exponent: op.scale_exponent,
            stable: op.stable,
            h: op.h,
            config_hash: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    pub method: Method,
    pub n: usize,
    pub p: usize,
    pub spectrum: Vec<f64>,
    pub h: f64,
    pub scale_exponent: i32,
    pub dropped_trivial: bool,
    pub trivial_eigenvalue: Option<f64>,
    pub null_dim: usize,
    pub lambda_max: f64,
    pub clusters: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl EmbeddingMeta {
    pub fn of(e: &Embedding) -> Self {
        Self {
            method: e.method,
            n: e.n(),
            p: e.p(),
            spectrum: e.spectrum.clone(),
            h: e.h,
            scale_exponent: e.scale_exponent,
            dropped_trivial: e.dropped_trivial,
            trivial_eigenvalue: e.trivial_eigenvalue,
            null_dim: e.null_dim,
            lambda_max: e.lambda_max,
            clusters: e.clusters.clone(),
            config_hash: None,
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

fn parse(field: &str, line: usize) -> Result<f64> {
    field.trim().parse().map_err(|_| Error::Format(format!("line {line}: '{field}' is not a number")))
}

/// Writes `cloud` to `csv` and its metadata next to it with a `.json` extension.
pub fn write_cloud(cloud: &SampleCloud, csv: &Path, config_hash: Option<&str>) -> Result<()> {
    let (d, m) = (cloud.ambient_dim(), cloud.intrinsic_dim());
    let mut w = csv::Writer::from_path(csv)?;
    let mut header: Vec<String> = (1..=d).map(|k| format!("x_{k}")).collect();
    header.extend((1..=m).map(|k| format!("u_{k}")));
    header.push("boundary_dist".into());
    w.write_record(&header)?;
    for i in 0..cloud.len() {
        let mut rec: Vec<String> = cloud.points.row(i).iter().map(f64::to_string).collect();
        rec.extend(cloud.intrinsic.row(i).iter().map(f64::to_string));
        rec.push(cloud.boundary_dist[i].map_or_else(|| NO_BOUNDARY.to_string(), |b| b.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    let meta = CloudMeta {
        spec: cloud.spec.clone(),
        seed: cloud.seed,
        sampling: cloud.sampling.clone(),
        n: cloud.len(),
        config_hash: config_hash.map(str::to_string),
    };
    write_json(&meta, &csv.with_extension("json"))
}

pub fn read_cloud(csv: &Path) -> Result<SampleCloud> {
    let meta: CloudMeta = read_json(&csv.with_extension("json"))?;
    let (d, m) = (meta.spec.ambient_dim, meta.spec.intrinsic_dim);
    let mut r = csv::Reader::from_path(csv)?;
    if r.headers()?.len() != d + m + 1 {
        return Err(Error::Format(format!("expected {} columns, found {}", d + m + 1, r.headers()?.len())));
    }
    let mut pts = Vec::new();
    let mut chart = Vec::new();
    let mut bd = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != d + m + 1 {
            return Err(Error::Format(format!("line {}: expected {} fields", line + 2, d + m + 1)));
        }
        for k in 0..d {
            pts.push(parse(&rec[k], line + 2)?);
        }
        for k in 0..m {
            chart.push(parse(&rec[d + k], line + 2)?);
        }
        let b = &rec[d + m];
        bd.push(if b.trim() == NO_BOUNDARY { None } else { Some(parse(b, line + 2)?) });
    }
    let n = bd.len();
    if n != meta.n {
        return Err(Error::Format(format!("sidecar declares {} points, file has {n}", meta.n)));
    }
    Ok(SampleCloud {
        spec: meta.spec,
        seed: meta.seed,
        sampling: meta.sampling,
        points: DMatrix::from_row_slice(n, d, &pts),
        intrinsic: DMatrix::from_row_slice(n, m, &chart),
        boundary_dist: bd,
    })
}

pub fn write_operator(op: &BiasOperator, coo: &Path, meta: &Path, config_hash: Option<&str>) -> Result<()> {
    let mut w = csv::Writer::from_path(coo)?;
    w.write_record(["row", "col", "value"])?;
    for (i, j, v) in op.l.triplets() {
        w.write_record([i.to_string(), j.to_string(), v.to_string()])?;
    }
    w.flush()?;
    let mut m = OperatorMeta::of(op);
    m.config_hash = config_hash.map(str::to_string);
    write_json(&m, meta)
}

pub fn read_operator(coo: &Path, meta: &Path) -> Result<BiasOperator> {
    let m: OperatorMeta = read_json(meta)?;
    let mut r = csv::Reader::from_path(coo)?;
    let mut t = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::Format(format!("line {}: expected row,col,value", line + 2)));
        }
        let idx = |s: &str| -> Result<usize> {
            s.trim().parse().map_err(|_| Error::Format(format!("line {}: bad index '{s}'", line + 2)))
        };
        let (i, j) = (idx(&rec[0])?, idx(&rec[1])?);
        if i >= m.n || j >= m.n {
            return Err(Error::Format(format!("line {}: index out of range", line + 2)));
        }
        t.push((i, j, parse(&rec[2], line + 2)?));
    }
    let l = CsrMatrix::from_triplets(m.n, m.n, t);
    let mut op = BiasOperator::new(m.method, l, m.h, None);
    op.symmetric = m.symmetric;
    op.psd_claimed = m.psd;
    op.smoother_order = m.smoother_order;
    op.scale_exponent = m.scale_exponent;
    op.stable = m.stable;
    Ok(op)
}

pub fn write_embedding(e: &Embedding, csv: &Path, meta: &Path, config_hash: Option<&str>) -> Result<()> {
    let mut w = csv::Writer::from_path(csv)?;
    w.write_record((1..=e.p()).map(|k| format!("e_{k}")))?;
    for i in 0..e.n() {
        w.write_record(e.coords.row(i).iter().map(f64::to_string))?;
    }
    w.flush()?;
    let mut m = EmbeddingMeta::of(e);
    m.config_hash = config_hash.map(str::to_string);
    write_json(&m, meta)
}

/// Reads the coordinates of an embedding CSV.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let p = r.headers()?.len();
    let mut vals = Vec::new();
    let mut n = 0;
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != p {
            return Err(Error::Format(format!("line {}: expected {p} fields", line + 2)));
        }
        for f in rec.iter() {
            vals.push(parse(f, line + 2)?);
        }
        n += 1;
    }
    Ok(DMatrix::from_row_slice(n, p, &vals))
}

/// Writes named columns of equal length.
pub fn write_columns(path: &Path, names: &[&str], columns: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(names)?;
    let n = columns.first().map_or(0, Vec::len);
    for i in 0..n {
        w.write_record(columns.iter().map(|c| c[i].to_string()))?;
    }
    w.flush()?;
    Ok(())
}
