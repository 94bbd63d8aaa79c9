//! Adaptive Gauss-Kronrod (7, 15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = r * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        // odd Kronrod nodes are the Gauss nodes
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * r, ((k - g) * r).abs())
}

/// `∫_a^b f` to absolute tolerance `max(abs_tol, rel_tol · |result|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    let mut stack = vec![(a, b, 0usize)];
    let mut total = 0.0;
    let (whole, _) = kronrod(&f, a, b);
    let scale = whole.abs();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = kronrod(&f, lo, hi);
        if !v.is_finite() || !e.is_finite() {
            return Err(Error::Quadrature { a, b });
        }
        let allowed = abs_tol.max(rel_tol * scale) * (hi - lo) / (b - a);
        if e <= allowed || (hi - lo) <= 1e-14 * (b - a).abs() {
            total += v;
        } else if depth >= 60 {
            return Err(Error::Quadrature { a, b });
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(total)
}

/// `∫_a^b f` with the default oracle tolerance (`1e-12` absolute, `1e-10` relative).
pub fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    integrate(f, a, b, 1e-12, 1e-10)
}
