//! The eight acceptance criteria, one PASS/FAIL line each.

mod common;

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};
use nldr::diagnostics::{equivalence_hlle_ltsa, interior_bias_scaling, ScalingFit, TestFunction};
use nldr::experiments::{
    boundary_table_experiment, fig1, fig2, fig3, lattice_ladder, random_ladder, BoundaryTableConfig,
};
use nldr::{
    build_graph, build_operator, embed, sample_manifold, ManifoldSpec, Method, NeighborhoodMode, OperatorParams,
    SolverKind, SolverOptions,
};

type Outcome = (bool, String);

fn boundary_table_criterion() -> Outcome {
    let t = boundary_table_experiment(&BoundaryTableConfig::default(), &SolverOptions::default()).unwrap();
    let ok = (1.275..=1.725).contains(&t.ratio_mean) && t.singular_ratio_mean <= 0.15;
    let detail = format!(
        "r = {:.3} over {} points, s3/s1 = {:.3}, mean Hessian ({:.3}, {:.3}, {:.3}), laplacian {:.3}, bottom singular vector ({:.3}, {:.3}, {:.3}) with b1/(b1+b2) = {:.3}",
        t.ratio_mean,
        t.reports.len(),
        t.singular_ratio_mean,
        t.f11_mean,
        t.f22_mean,
        t.f12_mean,
        t.laplacian_mean,
        t.bottom_vector_mean[0],
        t.bottom_vector_mean[1],
        t.bottom_vector_mean[2],
        t.bottom_vector_ratio
    );
    (ok, detail)
}

fn neumann_spectrum_criterion() -> Outcome {
    let (_, r) = fig2(1000, 0.05, 5, 0, &SolverOptions::default()).unwrap();
    let le = r.get(Method::LaplacianEigenmaps).unwrap();
    let llr = r.get(Method::LlrLaplacian).unwrap();
    let ratios = le.ratios.clone().unwrap_or_default();
    let ratios_ok =
        ratios.len() >= 4 && (1..4).all(|k| ((ratios[k] - ((k + 1) * (k + 1)) as f64) / ((k + 1) * (k + 1)) as f64).abs() <= 0.1);
    let ok = le.cosine_correlation >= 0.99 && ratios_ok && llr.linear_correlation >= 0.97;
    let shown: Vec<String> = ratios.iter().take(4).map(|v| format!("{v:.2}")).collect();
    let detail = format!(
        "LE |corr cos| = {:.4}, ratios [{}], LLR |corr x| = {:.4}",
        le.cosine_correlation,
        shown.join(", "),
        llr.linear_correlation
    );
    (ok, detail)
}

fn penalty_criterion() -> Outcome {
    let (cos, pow) = fig3(2000, 0.05, 0).unwrap();
    let (le, cl) = (Method::LaplacianEigenmaps, Method::CoefficientLaplacian);
    let err = |c: &nldr::diagnostics::PenaltyCurve, m: Method| c.relative_error[c.row(m).unwrap()].clone();
    let (pl, pc) = (err(&pow, le), err(&pow, cl));
    let power_ok = pl.iter().zip(&pc).all(|(l, c)| c.abs() < l.abs());
    let cos_ok = err(&cos, le).iter().chain(&err(&cos, cl)).all(|e| e.abs() <= 0.25);
    let fmt = |v: &[f64]| v.iter().map(|e| format!("{e:+.3}")).collect::<Vec<_>>().join(" ");
    let detail = format!(
        "signed power rel. err LE [{}] CL [{}]; cosine LE [{}] CL [{}]",
        fmt(&pl),
        fmt(&pc),
        fmt(&err(&cos, le)),
        fmt(&err(&cos, cl))
    );
    (power_ok && cos_ok, detail)
}

fn equivalence_criterion() -> Outcome {
    let ladder = random_ladder(&ManifoldSpec::rectangle(1.0, 0.625), &[0.2, 0.1, 0.05], 250, 0).unwrap();
    let r = equivalence_hlle_ltsa(&ladder, &TestFunction::default_set(2)).unwrap();
    let (count, worst) = r.inversions();
    let finest = *r.sup_gap.last().unwrap();
    let ok = (count == 0 || (count == 1 && worst <= 0.1)) && finest <= 0.2;
    let detail = format!(
        "sup gaps {:?}, mean |N| {:?}",
        r.sup_gap.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>(),
        r.mean_neighbors.iter().map(|k| format!("{k:.1}")).collect::<Vec<_>>()
    );
    (ok, detail)
}

fn fig1_criterion() -> Outcome {
    let out = fig1(2000, 0, NeighborhoodMode::Knn { k: 10 }, &SolverOptions::default()).unwrap();
    let r = &out.report;
    let get = |m| r.residual(m).unwrap_or(f64::INFINITY);
    let (lt, le, dm) = (get(Method::Ltsa), get(Method::LaplacianEigenmaps), get(Method::DiffusionMaps));
    let cc = r.ldr_lle_plus_canonical.clone().unwrap_or_default();
    let ok = lt < le && lt < dm && cc.len() == 3 && cc.iter().all(|&c| c >= 0.8);
    let detail = format!("Procrustes LTSA {lt:.3}, LE {le:.3}, DM {dm:.3}; LDR-LLE+ canonical {cc:.3?}");
    (ok, detail)
}

fn property_criterion() -> Outcome {
    let cloud = sample_manifold(&ManifoldSpec::rectangle(1.0, 0.625), 400, 3).unwrap();
    let graph = build_graph(&cloud, NeighborhoodMode::HBall { h: 0.15 }).unwrap();
    let affine = [cloud.eval(|u| 1.0 + 2.0 * u[0] - u[1]), cloud.eval(|u| u[1] - 0.3)];
    let ones = vec![1.0; cloud.len()];
    let mut failures = Vec::new();
    for method in Method::ALL {
        let op = build_operator(method, &cloud, &graph, &OperatorParams::new(2)).unwrap();
        let scale = op.l.max_abs();
        if op.symmetric && op.l.asymmetry() > 1e-12 * scale {
            failures.push(format!("{method} not symmetric"));
        }
        if op.psd_claimed {
            let eig = SymmetricEigen::new(op.l.to_dense()).eigenvalues;
            let (lo, hi) = (eig.min(), eig.max());
            if lo < -1e-8 * hi {
                failures.push(format!("{method} min eigenvalue {lo:e}"));
            }
        }
        let l1 = op.apply(&ones).unwrap();
        let norm = l1.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-8 * scale * (cloud.len() as f64).sqrt() {
            failures.push(format!("{method} L1 = {norm:e}"));
        }
        if matches!(method, Method::Ltsa | Method::Hlle) {
            for f in &affine {
                let lf = op.apply(f).unwrap();
                let rel = lf.iter().map(|v| v * v).sum::<f64>().sqrt()
                    / (scale * f.iter().map(|v| v * v).sum::<f64>().sqrt());
                if rel > 1e-6 {
                    failures.push(format!("{method} affine residual {rel:e}"));
                }
            }
        }
    }
    let detail = if failures.is_empty() { "all 9 methods consistent".to_string() } else { failures.join("; ") };
    (failures.is_empty(), detail)
}

fn scaling_criterion() -> Outcome {
    let ladder = lattice_ladder(&ManifoldSpec::segment(0.0, 1.0), &[0.1, 0.05, 0.025], 20.5).unwrap();
    let quad = interior_bias_scaling(&ladder, Method::LaplacianEigenmaps, |u| u[0] * u[0]).unwrap();
    let lin = interior_bias_scaling(&ladder, Method::LaplacianEigenmaps, |u| u[0]).unwrap();
    let interior = quad.interior.exponent();
    let boundary = lin.boundary.and_then(|b| b.exponent());
    let ok = interior.is_some_and(|e| (1.7..=2.3).contains(&e)) && boundary.is_some_and(|e| (0.7..=1.3).contains(&e));
    (ok, format!("interior exponent {interior:.3?}, boundary exponent {boundary:.3?}"))
}

fn oracle_criterion() -> Outcome {
    let mut worst = 0.0f64;
    let clouds = [
        (sample_manifold(&ManifoldSpec::swiss_roll_hole(), 50, 11).unwrap(), NeighborhoodMode::Knn { k: 10 }),
        (sample_manifold(&ManifoldSpec::rectangle(1.0, 0.625), 50, 12).unwrap(), NeighborhoodMode::HBall { h: 0.4 }),
    ];
    for (cloud, mode) in &clouds {
        let m = cloud.intrinsic_dim();
        let graph = build_graph(cloud, *mode).unwrap();
        for method in Method::ALL {
            let op = build_operator(method, cloud, &graph, &OperatorParams::new(m)).unwrap();
            worst = worst.max(common::relative_entry_error(&op.l.to_dense(), &common::oracle(method, cloud, *mode, m)));
        }
    }
    let cloud = sample_manifold(&ManifoldSpec::segment(0.0, 1.0), 500, 21).unwrap();
    let graph = build_graph(&cloud, NeighborhoodMode::HBall { h: 0.05 }).unwrap();
    let op = build_operator(Method::LaplacianEigenmaps, &cloud, &graph, &OperatorParams::new(1)).unwrap();
    let d = embed(&op, 5, true, &SolverOptions::default().with_kind(SolverKind::Dense)).unwrap();
    let tight = SolverOptions { tol: 1e-13, ..SolverOptions::default() };
    let it = embed(&op, 5, true, &tight.with_kind(SolverKind::Iterative)).unwrap();
    let value_gap = d.spectrum.iter().zip(&it.spectrum).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / d.lambda_max;
    let overlap = d.coords.transpose() * &it.coords;
    let vector_gap = (overlap.abs() - DMatrix::identity(5, 5)).amax();
    let ok = worst <= 1e-12 && value_gap <= 1e-8 && vector_gap <= 1e-8;
    (ok, format!("max entry error {worst:.1e}; eigenvalue gap {value_gap:.1e}, eigenvector gap {vector_gap:.1e}"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome, u64); 8] = [
        ("1 boundary-condition table", boundary_table_criterion, 300),
        ("2 Neumann spectrum", neumann_spectrum_criterion, 60),
        ("3 penalty fidelity", penalty_criterion, 120),
        ("4 HLLE/LTSA equivalence", equivalence_criterion, 300),
        ("5 Swiss roll ranking", fig1_criterion, 300),
        ("6 operator properties", property_criterion, 120),
        ("7 interior-bias scaling", scaling_criterion, 120),
        ("8 brute-force oracles", oracle_criterion, 300),
    ];
    let mut failed = Vec::new();
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let (ok, detail) = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = ok && in_time;
        println!(
            "criterion {name}: {} ({:.1}s of {budget}s) {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn scaling_is_exact_on_lattices_for_llr() {
    let ladder = lattice_ladder(&ManifoldSpec::segment(0.0, 1.0), &[0.1, 0.05, 0.025], 20.5).unwrap();
    let r = interior_bias_scaling(&ladder, Method::LlrLaplacian, |u| 3.0 * u[0] + 1.0).unwrap();
    assert_eq!(r.interior, ScalingFit::ExactNullSpace);
}
