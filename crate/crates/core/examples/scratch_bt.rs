use nldr::diagnostics::{penalty_fidelity, PenaltyFamily};
use nldr::*;
fn main() {
    let spec = ManifoldSpec::segment(-1.0, 1.0);
    let ms = [Method::LaplacianEigenmaps, Method::CoefficientLaplacian];
    for &h in &[0.03, 0.05, 0.1] {
        for seed in 0..6 {
            let c = sample_manifold(&spec, 2000, seed).unwrap();
            let p = penalty_fidelity(&c, &ms, PenaltyFamily::SignedPower, h).unwrap();
            let wins = (0..5).filter(|&i| p.relative_error[1][i].abs() < p.relative_error[0][i].abs()).count();
            println!("h {h} seed {seed} LE {:+.3?} CL {:+.3?} CL wins {wins}/5", p.relative_error[0], p.relative_error[1]);
        }
    }
}
