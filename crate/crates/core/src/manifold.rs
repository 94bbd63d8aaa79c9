//! Synthetic manifolds with known isometric charts.
//!
//! Every manifold here is parametrized by an isometric chart, so chart
//! coordinates double as ground-truth normal coordinates and chart distance
//! to the boundary is the geodesic boundary distance (up to curvature of
//! the boundary itself, which only the Swiss-roll hole has).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    Segment,
    Rectangle,
    Circle,
    SwissRollHole,
}

impl ManifoldKind {
    pub fn name(self) -> &'static str {
        match self {
            ManifoldKind::Segment => "segment",
            ManifoldKind::Rectangle => "rectangle",
            ManifoldKind::Circle => "circle",
            ManifoldKind::SwissRollHole => "swiss_roll_hole",
        }
    }
}

impl std::str::FromStr for ManifoldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "segment" => Ok(ManifoldKind::Segment),
            "rectangle" => Ok(ManifoldKind::Rectangle),
            "circle" => Ok(ManifoldKind::Circle),
            "swiss_roll_hole" => Ok(ManifoldKind::SwissRollHole),
            other => Err(Error::InvalidSpec(format!("unknown manifold '{other}'"))),
        }
    }
}

/// A synthetic manifold: kind, dimensions and named real parameters.
///
/// Parameter names by kind:
///
/// | kind | parameters (defaults) |
/// |------|-----------------------|
/// | segment | `lo` (0), `hi` (1) |
/// | rectangle | `width` (1), `height` (1) |
/// | circle | `radius` (1) |
/// | swiss_roll_hole | `t_min` (3π/2), `t_max` (9π/2), `width` (21), `hole_radius` (3), `hole_s`, `hole_w` (chart center) |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub kind: ManifoldKind,
    pub intrinsic_dim: usize,
    pub ambient_dim: usize,
    pub params: BTreeMap<String, f64>,
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

impl ManifoldSpec {
    pub fn segment(lo: f64, hi: f64) -> Self {
        Self {
            kind: ManifoldKind::Segment,
            intrinsic_dim: 1,
            ambient_dim: 1,
            params: params(&[("lo", lo), ("hi", hi)]),
        }
    }

    pub fn rectangle(width: f64, height: f64) -> Self {
        Self {
            kind: ManifoldKind::Rectangle,
            intrinsic_dim: 2,
            ambient_dim: 2,
            params: params(&[("width", width), ("height", height)]),
        }
    }

    pub fn circle(radius: f64) -> Self {
        Self {
            kind: ManifoldKind::Circle,
            intrinsic_dim: 1,
            ambient_dim: 2,
            params: params(&[("radius", radius)]),
        }
    }

    pub fn swiss_roll_hole() -> Self {
        Self {
            kind: ManifoldKind::SwissRollHole,
            intrinsic_dim: 2,
            ambient_dim: 3,
            params: params(&[
                ("t_min", 1.5 * PI),
                ("t_max", 4.5 * PI),
                ("width", 21.0),
                ("hole_radius", 3.0),
            ]),
        }
    }

    /// Default spec for a kind.
    pub fn default_for(kind: ManifoldKind) -> Self {
        match kind {
            ManifoldKind::Segment => Self::segment(0.0, 1.0),
            ManifoldKind::Rectangle => Self::rectangle(1.0, 1.0),
            ManifoldKind::Circle => Self::circle(1.0),
            ManifoldKind::SwissRollHole => Self::swiss_roll_hole(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_ambient_dim(mut self, d: usize) -> Self {
        self.ambient_dim = d;
        self
    }

    fn get(&self, name: &str) -> Result<f64> {
        self.params
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidSpec(format!("{} requires parameter '{name}'", self.kind.name())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        let expected_m = match self.kind {
            ManifoldKind::Segment | ManifoldKind::Circle => 1,
            ManifoldKind::Rectangle | ManifoldKind::SwissRollHole => 2,
        };
        if self.intrinsic_dim != expected_m {
            return bad(format!("{} has intrinsic dimension {expected_m}", self.kind.name()));
        }
        let min_d = match self.kind {
            ManifoldKind::Segment => 1,
            ManifoldKind::Rectangle | ManifoldKind::Circle => 2,
            ManifoldKind::SwissRollHole => 3,
        };
        if self.ambient_dim < min_d || (self.kind == ManifoldKind::SwissRollHole && self.ambient_dim != 3) {
            return bad(format!("ambient dimension {} invalid for {}", self.ambient_dim, self.kind.name()));
        }
        for (k, v) in &self.params {
            if !v.is_finite() {
                return bad(format!("parameter '{k}' is not finite"));
            }
        }
        match self.kind {
            ManifoldKind::Segment => {
                if self.get("hi")? <= self.get("lo")? {
                    return bad("segment length must be positive".into());
                }
            }
            ManifoldKind::Rectangle => {
                if self.get("width")? <= 0.0 || self.get("height")? <= 0.0 {
                    return bad("rectangle sides must be positive".into());
                }
            }
            ManifoldKind::Circle => {
                if self.get("radius")? <= 0.0 {
                    return bad("circle radius must be positive".into());
                }
            }
            ManifoldKind::SwissRollHole => {
                let (t0, t1) = (self.get("t_min")?, self.get("t_max")?);
                if t0 < 0.0 || t1 <= t0 {
                    return bad("swiss roll needs 0 <= t_min < t_max".into());
                }
                if self.get("width")? <= 0.0 {
                    return bad("swiss roll width must be positive".into());
                }
                let r = self.get("hole_radius")?;
                if r <= 0.0 {
                    return bad("hole radius must be positive".into());
                }
                let (cs, cw) = self.hole_center()?;
                let (len, width) = (self.roll_length()?, self.get("width")?);
                if cs - r <= 0.0 || cs + r >= len || cw - r <= 0.0 || cw + r >= width {
                    return bad("hole not inside chart".into());
                }
            }
        }
        Ok(())
    }

    /// Arc length of the roll's spiral between `t_min` and `t_max`.
    fn roll_length(&self) -> Result<f64> {
        Ok(spiral_arc_length(self.get("t_max")?) - spiral_arc_length(self.get("t_min")?))
    }

    pub fn hole_center(&self) -> Result<(f64, f64)> {
        let s = match self.params.get("hole_s") {
            Some(&s) => s,
            None => 0.5 * self.roll_length()?,
        };
        let w = match self.params.get("hole_w") {
            Some(&w) => w,
            None => 0.5 * self.get("width")?,
        };
        Ok((s, w))
    }

    /// Axis-aligned bounding box of the chart domain, one `(lo, hi)` per axis.
    pub fn chart_bounds(&self) -> Result<Vec<(f64, f64)>> {
        Ok(match self.kind {
            ManifoldKind::Segment => vec![(self.get("lo")?, self.get("hi")?)],
            ManifoldKind::Rectangle => vec![(0.0, self.get("width")?), (0.0, self.get("height")?)],
            ManifoldKind::Circle => vec![(0.0, 2.0 * PI * self.get("radius")?)],
            ManifoldKind::SwissRollHole => vec![(0.0, self.roll_length()?), (0.0, self.get("width")?)],
        })
    }

    /// Riemannian volume (length or area) of the manifold.
    pub fn volume(&self) -> Result<f64> {
        let box_volume: f64 = self.chart_bounds()?.iter().map(|(a, b)| b - a).product();
        Ok(match self.kind {
            ManifoldKind::SwissRollHole => box_volume - PI * self.get("hole_radius")?.powi(2),
            _ => box_volume,
        })
    }

    pub fn has_boundary(&self) -> bool {
        self.kind != ManifoldKind::Circle
    }

    /// Whether chart coordinates lie in the (closed) chart domain.
    pub fn contains(&self, u: &[f64]) -> bool {
        if u.len() != self.intrinsic_dim {
            return false;
        }
        let Ok(bounds) = self.chart_bounds() else { return false };
        let in_box = match self.kind {
            // the circle chart is periodic
            ManifoldKind::Circle => u[0].is_finite(),
            _ => bounds.iter().zip(u).all(|(&(a, b), &x)| x >= a && x <= b),
        };
        if !in_box {
            return false;
        }
        if self.kind == ManifoldKind::SwissRollHole {
            let (cs, cw) = self.hole_center().unwrap_or((f64::NAN, f64::NAN));
            let r = self.params["hole_radius"];
            return (u[0] - cs).hypot(u[1] - cw) >= r;
        }
        true
    }

    /// Maps chart coordinates to the ambient space.
    pub fn embed_chart(&self, u: &[f64]) -> Result<Vec<f64>> {
        if !self.contains(u) {
            return Err(Error::OutsideDomain { manifold: self.kind.name().into(), coords: u.to_vec() });
        }
        let mut x = vec![0.0; self.ambient_dim];
        match self.kind {
            ManifoldKind::Segment => x[0] = u[0],
            ManifoldKind::Rectangle => x[..2].copy_from_slice(u),
            ManifoldKind::Circle => {
                let r = self.get("radius")?;
                x[0] = r * (u[0] / r).cos();
                x[1] = r * (u[0] / r).sin();
            }
            ManifoldKind::SwissRollHole => {
                let t0 = self.get("t_min")?;
                let t = spiral_angle_at(spiral_arc_length(t0) + u[0], t0, self.get("t_max")?);
                x[0] = t * t.cos();
                x[1] = u[1];
                x[2] = t * t.sin();
            }
        }
        Ok(x)
    }

    /// Chart distance to the boundary, `None` for boundaryless manifolds.
    pub fn boundary_distance(&self, u: &[f64]) -> Option<f64> {
        self.nearest_boundary(u).map(|(d, _)| d)
    }

    /// Unit inward normal (in chart coordinates) of the nearest boundary component.
    pub fn inward_normal(&self, u: &[f64]) -> Option<Vec<f64>> {
        self.nearest_boundary(u).map(|(_, n)| n)
    }

    /// Distance to each boundary component with its inward normal. Faces are
    /// ordered lower/upper per chart axis, then the hole.
    pub fn boundary_faces(&self, u: &[f64]) -> Vec<(f64, Vec<f64>)> {
        let mut faces = Vec::new();
        if self.kind == ManifoldKind::Circle {
            return faces;
        }
        let Ok(bounds) = self.chart_bounds() else { return faces };
        for (axis, &(a, b)) in bounds.iter().enumerate() {
            let mut n = vec![0.0; bounds.len()];
            n[axis] = 1.0;
            faces.push(((u[axis] - a).max(0.0), n.clone()));
            n[axis] = -1.0;
            faces.push(((b - u[axis]).max(0.0), n));
        }
        if self.kind == ManifoldKind::SwissRollHole {
            if let Ok((cs, cw)) = self.hole_center() {
                let r = self.params["hole_radius"];
                let (ds, dw) = (u[0] - cs, u[1] - cw);
                let rho = ds.hypot(dw);
                let n = if rho > 0.0 { vec![ds / rho, dw / rho] } else { vec![1.0, 0.0] };
                faces.push(((rho - r).max(0.0), n));
            }
        }
        faces
    }

    fn nearest_boundary(&self, u: &[f64]) -> Option<(f64, Vec<f64>)> {
        self.boundary_faces(u).into_iter().fold(None, |best: Option<(f64, Vec<f64>)>, (d, n)| match best {
            Some((b, _)) if b <= d => best,
            _ => Some((d, n)),
        })
    }
}

/// Arc length of the spiral `t ↦ (t cos t, t sin t)` from 0 to `t`.
pub fn spiral_arc_length(t: f64) -> f64 {
    0.5 * (t * (1.0 + t * t).sqrt() + t.asinh())
}

/// Inverts [`spiral_arc_length`] on `[t_lo, t_hi]` by bisection.
fn spiral_angle_at(s: f64, t_lo: f64, t_hi: f64) -> f64 {
    let (mut lo, mut hi) = (t_lo, t_hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spiral_arc_length(mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// How the points of a cloud were placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// i.i.d. uniform with respect to the Riemannian volume.
    Uniform,
    /// Regular vertex lattice in the chart (per-axis point counts).
    Lattice { counts: Vec<usize> },
    /// Supplied externally.
    Given,
}

/// Points on a manifold together with their ground-truth chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    pub spec: ManifoldSpec,
    pub seed: u64,
    pub sampling: Sampling,
    /// n × d ambient coordinates.
    pub points: DMatrix<f64>,
    /// n × m chart coordinates.
    pub intrinsic: DMatrix<f64>,
    /// Chart distance to the boundary; `None` when the manifold has none.
    pub boundary_dist: Vec<Option<f64>>,
}

impl SampleCloud {
    /// Builds a cloud from chart coordinates, one row per point.
    pub fn from_intrinsic(spec: ManifoldSpec, rows: &[Vec<f64>], seed: u64, sampling: Sampling) -> Result<Self> {
        spec.validate()?;
        let (n, d, m) = (rows.len(), spec.ambient_dim, spec.intrinsic_dim);
        let mut points = DMatrix::zeros(n, d);
        let mut intrinsic = DMatrix::zeros(n, m);
        let mut boundary_dist = Vec::with_capacity(n);
        for (i, u) in rows.iter().enumerate() {
            if u.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: u.len() });
            }
            let x = spec.embed_chart(u)?;
            for (k, v) in x.iter().enumerate() {
                points[(i, k)] = *v;
            }
            for (k, v) in u.iter().enumerate() {
                intrinsic[(i, k)] = *v;
            }
            boundary_dist.push(spec.boundary_distance(u));
        }
        Ok(Self { spec, seed, sampling, points, intrinsic, boundary_dist })
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn ambient_dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic.ncols()
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.points.row(i).iter().copied().collect()
    }

    pub fn chart(&self, i: usize) -> Vec<f64> {
        self.intrinsic.row(i).iter().copied().collect()
    }

    /// Evaluates `f` on every point's chart coordinates.
    pub fn eval<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| f(&self.chart(i))).collect()
    }

    /// Points at least `margin` away from the boundary (all points if none).
    pub fn interior(&self, margin: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.boundary_dist[i].is_none_or(|d| d >= margin))
            .collect()
    }
}

/// Draws `n` points uniformly with respect to the manifold's volume.
pub fn sample_manifold(spec: &ManifoldSpec, n: usize, seed: u64) -> Result<SampleCloud> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let bounds = spec.chart_bounds()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    while rows.len() < n {
        let u: Vec<f64> = bounds.iter().map(|&(a, b)| a + (b - a) * rng.random::<f64>()).collect();
        // rejection against the hole; everything else is a box in the chart
        if spec.kind == ManifoldKind::Circle || spec.contains(&u) {
            rows.push(u);
        }
    }
    SampleCloud::from_intrinsic(spec.clone(), &rows, seed, Sampling::Uniform)
}

/// Places points on a regular vertex lattice of the chart, boundary vertices
/// included (the circle lattice is periodic and skips the duplicate endpoint).
/// Lattice vertices inside the Swiss-roll hole are dropped.
pub fn lattice_manifold(spec: &ManifoldSpec, counts: &[usize]) -> Result<SampleCloud> {
    spec.validate()?;
    if counts.len() != spec.intrinsic_dim || counts.iter().any(|&c| c < 2) {
        return Err(Error::InvalidArgument(format!(
            "lattice needs {} per-axis counts of at least 2",
            spec.intrinsic_dim
        )));
    }
    let bounds = spec.chart_bounds()?;
    let axis = |k: usize| -> Vec<f64> {
        let (a, b) = bounds[k];
        let c = counts[k];
        if spec.kind == ManifoldKind::Circle {
            (0..c).map(|j| a + (b - a) * j as f64 / c as f64).collect()
        } else {
            (0..c).map(|j| a + (b - a) * j as f64 / (c - 1) as f64).collect()
        }
    };
    let rows: Vec<Vec<f64>> = if spec.intrinsic_dim == 1 {
        axis(0).into_iter().map(|x| vec![x]).collect()
    } else {
        let (xs, ys) = (axis(0), axis(1));
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| vec![x, y]))
            .filter(|u| spec.contains(u))
            .collect()
    };
    SampleCloud::from_intrinsic(spec.clone(), &rows, 0, Sampling::Lattice { counts: counts.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_samples_and_boundary() {
        let cloud = sample_manifold(&ManifoldSpec::segment(0.0, 1.0), 4, 11).unwrap();
        assert_eq!(cloud.len(), 4);
        for i in 0..4 {
            let x = cloud.intrinsic[(i, 0)];
            assert!((0.0..=1.0).contains(&x));
            assert_eq!(cloud.boundary_dist[i], Some(x.min(1.0 - x)));
            assert_eq!(cloud.points[(i, 0)], x);
        }
    }

    #[test]
    fn identity_charts() {
        let seg = ManifoldSpec::segment(0.0, 1.0);
        assert_eq!(seg.embed_chart(&[0.5]).unwrap(), vec![0.5]);
        let rect = ManifoldSpec::rectangle(1.0, 2.0).with_ambient_dim(4);
        assert_eq!(rect.embed_chart(&[0.3, 1.1]).unwrap(), vec![0.3, 1.1, 0.0, 0.0]);
    }

    #[test]
    fn outside_domain_is_rejected() {
        let rect = ManifoldSpec::rectangle(1.0, 2.0);
        assert!(matches!(rect.embed_chart(&[1.5, 0.0]), Err(Error::OutsideDomain { .. })));
        let roll = ManifoldSpec::swiss_roll_hole();
        let (cs, cw) = roll.hole_center().unwrap();
        assert!(roll.embed_chart(&[cs, cw]).is_err());
    }

    #[test]
    fn invalid_specs() {
        assert!(ManifoldSpec::segment(1.0, 1.0).validate().is_err());
        assert!(ManifoldSpec::rectangle(-1.0, 1.0).validate().is_err());
        let big_hole = ManifoldSpec::swiss_roll_hole().with_param("hole_radius", 100.0);
        let err = big_hole.validate().unwrap_err().to_string();
        assert!(err.contains("hole not inside chart"), "{err}");
        assert!(sample_manifold(&ManifoldSpec::circle(1.0), 0, 1).is_err());
    }

    #[test]
    fn hole_is_empty() {
        let spec = ManifoldSpec::swiss_roll_hole();
        let cloud = sample_manifold(&spec, 3000, 5).unwrap();
        let (cs, cw) = spec.hole_center().unwrap();
        for i in 0..cloud.len() {
            let u = cloud.chart(i);
            assert!((u[0] - cs).hypot(u[1] - cw) >= 3.0);
        }
    }

    #[test]
    fn circle_has_no_boundary() {
        let cloud = sample_manifold(&ManifoldSpec::circle(2.0), 50, 3).unwrap();
        assert!(cloud.boundary_dist.iter().all(Option::is_none));
        for i in 0..cloud.len() {
            let p = cloud.point(i);
            assert!((p[0].hypot(p[1]) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn arc_length_inverse() {
        for &t in &[4.8, 7.0, 12.5] {
            let s = spiral_arc_length(t);
            assert!((spiral_angle_at(s, 1.5 * PI, 4.5 * PI) - t).abs() < 1e-10);
        }
    }

    #[test]
    fn lattice_counts_and_hole() {
        let cloud = lattice_manifold(&ManifoldSpec::rectangle(1.0, 0.5), &[5, 3]).unwrap();
        assert_eq!(cloud.len(), 15);
        assert_eq!(cloud.boundary_dist.iter().filter(|d| **d == Some(0.0)).count(), 12);
        let circle = lattice_manifold(&ManifoldSpec::circle(1.0), &[8]).unwrap();
        assert!((circle.intrinsic[(7, 0)] - 2.0 * PI * 7.0 / 8.0).abs() < 1e-15);
        let roll = lattice_manifold(&ManifoldSpec::swiss_roll_hole(), &[40, 10]).unwrap();
        assert!(roll.len() < 400);
    }

    #[test]
    fn inward_normals() {
        let rect = ManifoldSpec::rectangle(1.0, 1.0);
        assert_eq!(rect.inward_normal(&[0.01, 0.5]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(rect.inward_normal(&[0.5, 0.99]).unwrap(), vec![0.0, -1.0]);
        let roll = ManifoldSpec::swiss_roll_hole();
        let (cs, cw) = roll.hole_center().unwrap();
        let n = roll.inward_normal(&[cs + 3.1, cw]).unwrap();
        assert!((n[0] - 1.0).abs() < 1e-12 && n[1].abs() < 1e-12);
    }
}
