//! Quadratic-form gap between HLLE and LTSA over a bandwidth ladder.

use serde::{Deserialize, Serialize};

use super::Provenance;
use crate::error::{Error, Result};
use crate::manifold::SampleCloud;
use crate::neighborhoods::{build_graph, local_frames, Centering, NeighborhoodMode};
use crate::operators::{hlle, ltsa, Method};

/// A smooth function of the chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TestFunction {
    /// `Π u_a^{p_a}`.
    Monomial { powers: Vec<u32> },
    /// `cos(ω · u + φ)`.
    Wave { freq: Vec<f64>, phase: f64 },
    /// `c₀ + Σ c_a u_a`.
    Affine { coeffs: Vec<f64> },
    /// A test function plus an affine function.
    Shifted { base: Box<TestFunction>, affine: Vec<f64> },
}

impl TestFunction {
    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            TestFunction::Monomial { powers } => powers.iter().zip(u).map(|(&p, x)| x.powi(p as i32)).product(),
            TestFunction::Wave { freq, phase } => (freq.iter().zip(u).map(|(w, x)| w * x).sum::<f64>() + phase).cos(),
            TestFunction::Affine { coeffs } => affine(coeffs, u),
            TestFunction::Shifted { base, affine: a } => base.eval(u) + affine(a, u),
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Monomial { powers } => {
                let parts: Vec<String> = powers
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0)
                    .map(|(a, &p)| if p == 1 { format!("u{}", a + 1) } else { format!("u{}^{p}", a + 1) })
                    .collect();
                if parts.is_empty() {
                    "1".into()
                } else {
                    parts.join("*")
                }
            }
            TestFunction::Wave { freq, phase } => format!("cos({freq:?}.u+{phase})"),
            TestFunction::Affine { coeffs } => format!("affine{coeffs:?}"),
            TestFunction::Shifted { base, affine } => format!("{}+affine{affine:?}", base.label()),
        }
    }

    /// Quadratic and cubic monomials and two plane waves in `m` variables.
    pub fn default_set(m: usize) -> Vec<TestFunction> {
        let unit = |a: usize, p: u32| {
            let mut v = vec![0; m];
            v[a] = p;
            v
        };
        let mut out = vec![
            TestFunction::Monomial { powers: unit(0, 2) },
            TestFunction::Monomial { powers: unit(0, 3) },
        ];
        if m > 1 {
            let mut mixed = unit(0, 1);
            mixed[1] = 1;
            out.push(TestFunction::Monomial { powers: mixed });
            out.push(TestFunction::Monomial { powers: unit(1, 2) });
        } else {
            out.push(TestFunction::Monomial { powers: unit(0, 4) });
            out.push(TestFunction::Wave { freq: vec![5.0], phase: 0.3 });
        }
        let mut w = vec![0.0; m];
        w[0] = 3.0;
        out.push(TestFunction::Wave { freq: w.clone(), phase: 0.5 });
        if m > 1 {
            w[1] = 2.0;
            out.push(TestFunction::Wave { freq: w, phase: -0.2 });
        }
        out
    }
}

fn affine(c: &[f64], u: &[f64]) -> f64 {
    c[0] + c[1..].iter().zip(u).map(|(a, x)| a * x).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// Descending bandwidths.
    pub hs: Vec<f64>,
    pub functions: Vec<String>,
    /// `|fᵀ(L_HLLE - L_LTSA)f| / |fᵀ L_LTSA f|` per bandwidth (rows) and function.
    pub gaps: Vec<Vec<f64>>,
    /// Largest gap over the functions at each bandwidth.
    pub sup_gap: Vec<f64>,
    /// `‖(L_HLLE - L_LTSA)f‖ / ‖L_LTSA f‖` restricted to points at least `2h`
    /// from the boundary.
    pub interior_gaps: Vec<Vec<f64>>,
    /// The unnormalized interior norms `‖(L_HLLE - L_LTSA)f‖`.
    pub interior_raw: Vec<Vec<f64>>,
    /// Mean closed neighborhood size per bandwidth.
    pub mean_neighbors: Vec<f64>,
    pub provenance: Vec<Provenance>,
}

impl EquivalenceReport {
    /// Number of rungs where the sup gap grows, and the largest relative growth.
    pub fn inversions(&self) -> (usize, f64) {
        let mut count = 0;
        let mut worst = 0.0f64;
        for w in self.sup_gap.windows(2) {
            if w[1] > w[0] {
                count += 1;
                worst = worst.max((w[1] - w[0]) / w[0]);
            }
        }
        (count, worst)
    }
}

/// Forms at or below this fraction of `‖f‖²` count as zero.
const NULL_FORM: f64 = 1e-6;

/// Compares the HLLE and LTSA quadratic forms on each `(cloud, h)` rung.
pub fn equivalence_hlle_ltsa(ladder: &[(SampleCloud, f64)], tests: &[TestFunction]) -> Result<EquivalenceReport> {
    if ladder.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 bandwidths, got {}", ladder.len())));
    }
    if tests.len() < 5 {
        return Err(Error::InvalidArgument(format!("need at least 5 test functions, got {}", tests.len())));
    }
    if ladder.windows(2).any(|w| !(w[1].1 < w[0].1)) {
        return Err(Error::InvalidArgument("bandwidths must be strictly decreasing".into()));
    }
    let mut report = EquivalenceReport {
        hs: ladder.iter().map(|r| r.1).collect(),
        functions: tests.iter().map(TestFunction::label).collect(),
        gaps: Vec::new(),
        sup_gap: Vec::new(),
        interior_gaps: Vec::new(),
        interior_raw: Vec::new(),
        mean_neighbors: Vec::new(),
        provenance: Vec::new(),
    };
    for (cloud, h) in ladder {
        let m = cloud.intrinsic_dim();
        let graph = build_graph(cloud, NeighborhoodMode::HBall { h: *h })?;
        let frames = local_frames(cloud, &graph, m, Centering::OnMean)?;
        let lh = hlle(&graph, &frames)?;
        let lt = ltsa(&graph, &frames)?;
        let interior = cloud.interior(2.0 * h);
        let (mut gaps, mut igaps, mut iraw) = (Vec::new(), Vec::new(), Vec::new());
        for t in tests {
            let f = cloud.eval(|u| t.eval(u));
            let norm2: f64 = f.iter().map(|v| v * v).sum();
            let qh = lh.quadratic_form(&f)?;
            let qt = lt.quadratic_form(&f)?;
            let gap = if qh.abs() <= NULL_FORM * norm2 && qt.abs() <= NULL_FORM * norm2 {
                0.0
            } else {
                (qh - qt).abs() / qt.abs()
            };
            gaps.push(gap);
            let ah = lh.apply(&f)?;
            let at = lt.apply(&f)?;
            let (mut diff, mut base) = (0.0, 0.0);
            for &i in &interior {
                diff += (ah[i] - at[i]).powi(2);
                base += at[i].powi(2);
            }
            let (diff, base) = (diff.sqrt(), base.sqrt());
            iraw.push(diff);
            igaps.push(if diff <= NULL_FORM * norm2.sqrt() { 0.0 } else { diff / base });
        }
        if gaps.iter().chain(&igaps).any(|g| !g.is_finite()) {
            return Err(Error::Inconclusive(format!("non-finite gap at h = {h}")));
        }
        report.sup_gap.push(gaps.iter().copied().fold(0.0, f64::max));
        report.gaps.push(gaps);
        report.interior_gaps.push(igaps);
        report.interior_raw.push(iraw);
        report.mean_neighbors.push(
            (0..graph.len()).map(|i| graph.neighbors[i].len() + 1).sum::<usize>() as f64 / graph.len() as f64,
        );
        report.provenance.push(Provenance::of(cloud, *h, &[Method::Hlle, Method::Ltsa]));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{sample_manifold, ManifoldSpec};

    #[test]
    fn labels_and_values() {
        let t = TestFunction::Monomial { powers: vec![1, 2] };
        assert_eq!(t.label(), "u1*u2^2");
        assert_eq!(t.eval(&[2.0, 3.0]), 18.0);
        let s = TestFunction::Shifted { base: Box::new(t), affine: vec![1.0, 0.5, -1.0] };
        assert_eq!(s.eval(&[2.0, 3.0]), 18.0 + 1.0 + 1.0 - 3.0);
        assert_eq!(TestFunction::default_set(2).len(), 6);
        assert_eq!(TestFunction::default_set(1).len(), 5);
    }

    #[test]
    fn affine_functions_have_zero_gap() {
        let spec = ManifoldSpec::rectangle(1.0, 0.625);
        let ladder: Vec<(SampleCloud, f64)> = [(0.4, 100), (0.3, 180), (0.2, 400)]
            .iter()
            .map(|&(h, n)| (sample_manifold(&spec, n, 5).unwrap(), h))
            .collect();
        let mut tests = TestFunction::default_set(2);
        tests[0] = TestFunction::Affine { coeffs: vec![1.0, 2.0, -3.0] };
        let r = equivalence_hlle_ltsa(&ladder, &tests).unwrap();
        for row in &r.gaps {
            assert_eq!(row[0], 0.0);
            assert!(row.iter().all(|g| g.is_finite() && *g >= 0.0));
        }
    }

    #[test]
    fn rejects_short_ladders() {
        let cloud = sample_manifold(&ManifoldSpec::rectangle(1.0, 1.0), 50, 1).unwrap();
        let ladder = vec![(cloud.clone(), 0.5), (cloud, 0.4)];
        assert!(matches!(
            equivalence_hlle_ltsa(&ladder, &TestFunction::default_set(2)),
            Err(Error::InvalidArgument(_))
        ));
    }
}
