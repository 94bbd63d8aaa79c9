use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use nldr::diagnostics::estimate_hessian;
use nldr::{build_graph, build_operator, sample_manifold, ManifoldSpec, Method, NeighborhoodMode, OperatorParams};

fn method() -> impl Strategy<Value = Method> {
    proptest::sample::select(Method::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn constants_are_annihilated_and_flags_hold(seed in 0u64..1000, n in 150usize..300, method in method()) {
        let cloud = sample_manifold(&ManifoldSpec::rectangle(1.0, 0.625), n, seed).unwrap();
        let graph = build_graph(&cloud, NeighborhoodMode::Knn { k: 12 }).unwrap();
        let op = build_operator(method, &cloud, &graph, &OperatorParams::new(2)).unwrap();
        let scale = op.l.max_abs();
        let l1 = op.apply(&vec![1.0; n]).unwrap();
        prop_assert!(l1.iter().all(|v| v.abs() <= 1e-9 * scale), "{method}");
        if op.symmetric {
            prop_assert!(op.l.asymmetry() <= 1e-12 * scale, "{method}");
        }
    }

    #[test]
    fn affine_shifts_leave_hlle_and_ltsa_penalties_unchanged(
        seed in 0u64..1000,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        c in -2.0f64..2.0,
    ) {
        let cloud = sample_manifold(&ManifoldSpec::rectangle(1.0, 0.625), 300, seed).unwrap();
        let graph = build_graph(&cloud, NeighborhoodMode::Knn { k: 12 }).unwrap();
        let f = cloud.eval(|u| (3.0 * u[0]).sin() * u[1]);
        let g = cloud.eval(|u| (3.0 * u[0]).sin() * u[1] + a + b * u[0] + c * u[1]);
        for method in [Method::Hlle, Method::Ltsa] {
            let op = build_operator(method, &cloud, &graph, &OperatorParams::new(2)).unwrap();
            let (qf, qg) = (op.quadratic_form(&f).unwrap(), op.quadratic_form(&g).unwrap());
            prop_assert!((qf - qg).abs() <= 1e-8 * qf.abs().max(1e-8), "{method}: {qf} vs {qg}");
        }
    }

    #[test]
    fn hessians_of_quadratics_are_exact(
        seed in 0u64..1000,
        a11 in -3.0f64..3.0,
        a22 in -3.0f64..3.0,
        a12 in -3.0f64..3.0,
    ) {
        let cloud = sample_manifold(&ManifoldSpec::rectangle(1.0, 0.625), 800, seed).unwrap();
        let f = cloud.eval(|u| 0.5 * a11 * u[0] * u[0] + a12 * u[0] * u[1] + 0.5 * a22 * u[1] * u[1] - u[0] + 2.0);
        let point = cloud.interior(0.2)[0];
        let est = estimate_hessian(&cloud, &f, point, 0.15).unwrap();
        // rotate the chart Hessian into the estimator's frame
        let a = [[a11, a12], [a12, a22]];
        let fr = &est.frame;
        for r in 0..2 {
            for s in 0..2 {
                let want: f64 = (0..2).flat_map(|p| (0..2).map(move |q| (p, q))).map(|(p, q)| fr[r][p] * a[p][q] * fr[s][q]).sum();
                prop_assert!((est.h(r, s) - want).abs() <= 1e-8, "{r}{s}: {} vs {want}", est.h(r, s));
                prop_assert!((est.h(r, s) - want).abs() <= est.fit_residual);
            }
        }
    }
}

#[test]
fn swiss_roll_is_isometric_on_nearby_pairs() {
    let cloud = sample_manifold(&ManifoldSpec::swiss_roll_hole(), 2000, 5).unwrap();
    let n = cloud.len();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let chart: f64 = (0..2).map(|a| (cloud.intrinsic[(i, a)] - cloud.intrinsic[(j, a)]).powi(2)).sum::<f64>().sqrt();
            let ambient: f64 = (0..3).map(|a| (cloud.points[(i, a)] - cloud.points[(j, a)]).powi(2)).sum::<f64>().sqrt();
            pairs.push((chart, ambient));
        }
    }
    assert!(pairs.iter().all(|(c, a)| *a <= c + 1e-12));
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    for (c, a) in &pairs[..100] {
        assert!((c - a) / c <= 1e-3, "chart {c} ambient {a}");
    }
}

#[test]
fn rectangle_samples_are_uniform() {
    let cloud = sample_manifold(&ManifoldSpec::rectangle(1.0, 0.625), 20_000, 9).unwrap();
    let bins = 5;
    let mut counts = vec![0.0; bins * bins];
    for i in 0..cloud.len() {
        let bx = ((cloud.intrinsic[(i, 0)] / 1.0 * bins as f64) as usize).min(bins - 1);
        let by = ((cloud.intrinsic[(i, 1)] / 0.625 * bins as f64) as usize).min(bins - 1);
        counts[bx * bins + by] += 1.0;
    }
    let expected = cloud.len() as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new((counts.len() - 1) as f64).unwrap().inverse_cdf(0.999);
    assert!(stat < critical, "chi-squared {stat} >= {critical}");
}

#[test]
fn conditional_second_moment_on_the_ball() {
    // u uniform in the unit m-ball: E(u_i² | u₁) = (1 - u₁²)/(m + 1)
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for m in [2usize, 3] {
        let bins = 10;
        let (mut sum, mut want, mut count) = (vec![0.0; bins], vec![0.0; bins], vec![0usize; bins]);
        let mut accepted = 0;
        while accepted < 1_000_000 {
            let u: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            if u.iter().map(|v| v * v).sum::<f64>() > 1.0 {
                continue;
            }
            accepted += 1;
            let b = (((u[0] + 1.0) / 2.0 * bins as f64) as usize).min(bins - 1);
            sum[b] += u[1] * u[1];
            want[b] += (1.0 - u[0] * u[0]) / (m + 1) as f64;
            count[b] += 1;
        }
        for b in 0..bins {
            let c = count[b] as f64;
            assert!((sum[b] / c - want[b] / c).abs() <= 1e-2, "m {m} bin {b}");
        }
    }
}
