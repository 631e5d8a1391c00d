//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands, plus a
//! fixed Gauss–Legendre rule for smooth radial profiles.

use crate::numeric::Kahan;
use crate::C64;
use std::sync::OnceLock;

// 15-point Kronrod nodes (positive half) with embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7K15 panel: returns (kronrod, |kronrod - gauss|).
fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, &x) in XGK.iter().enumerate().take(7) {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        kronrod += (f1 + f2) * WGK[i];
        if i % 2 == 1 {
            gauss += (f1 + f2) * WG[i / 2];
        }
    }
    kronrod *= h;
    gauss *= h;
    let diff = (kronrod - gauss).norm();
    // classic rescaling: the raw difference underestimates smooth panels and
    // overestimates rough ones
    (kronrod, (200.0 * diff).powf(1.5).min(diff.max(1e-300)))
}

/// Adaptive bisection on [a, b] to absolute tolerance `abs_tol`, starting from
/// `init_panels` equal panels.  Returns (value, error estimate); the estimate
/// is honest even when the depth cap is hit.
pub fn adaptive<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: usize,
    init_panels: usize,
) -> (C64, f64) {
    let n0 = init_panels.max(1);
    let mut sum = Kahan::default();
    let mut err = 0.0;
    let w = (b - a) / n0 as f64;
    for i in 0..n0 {
        let pa = a + w * i as f64;
        let pb = if i + 1 == n0 { b } else { a + w * (i + 1) as f64 };
        let (v, e) = adapt_panel(f, pa, pb, abs_tol * (pb - pa) / (b - a), max_depth);
        sum.add(v);
        err += e;
    }
    (sum.value(), err)
}

fn adapt_panel<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
) -> (C64, f64) {
    let (v, e) = gk15(f, a, b);
    if e <= tol || depth == 0 || (b - a) < 1e-14 * (1.0 + a.abs()) {
        return (v, e);
    }
    let m = 0.5 * (a + b);
    let (v1, e1) = adapt_panel(f, a, m, 0.5 * tol, depth - 1);
    let (v2, e2) = adapt_panel(f, m, b, 0.5 * tol, depth - 1);
    (v1 + v2, e1 + e2)
}

/// Integrate `f` on [0, ∞) given the decay certificate |f(u)| ≤ bound·e^{−rate·u}.
/// `osc` is a characteristic oscillation wavenumber used to seed panels.
pub fn integrate_decaying<F: Fn(f64) -> C64>(
    f: &F,
    rate: f64,
    bound: f64,
    osc: f64,
    abs_tol: f64,
    max_depth: usize,
) -> (C64, f64) {
    debug_assert!(rate > 0.0);
    // cut where the tail bound drops below a tenth of the target
    let u_max = ((bound.max(1e-300) / (0.1 * abs_tol)).ln() / rate).clamp(8.0, 2000.0);
    let tail = bound * (-rate * u_max).exp() / rate;
    let panels = ((u_max * (osc.abs().max(0.5)) / std::f64::consts::PI).ceil() as usize)
        .clamp(4, 4096);
    let (v, e) = adaptive(f, 0.0, u_max, abs_tol, max_depth, panels);
    (v, e + tail)
}

/// 64-point Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre_64() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(64))
}

/// Newton iteration on P_n for the Gauss–Legendre rule.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
