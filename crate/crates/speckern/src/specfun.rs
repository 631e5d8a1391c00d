//! Complex special functions behind every spectral coefficient: log-Gamma,
//! Pochhammer symbols, Gauss 2F1 at unit argument, the cosh-transform
//! coefficient 2^{ν−1}Γ((ν−ir)/2)Γ((ν+ir)/2)/Γ(ν), generic cosine transforms,
//! and a Laplace-method estimator for endpoint-dominated integrals.

use crate::error::{Error, Result};
use crate::numeric::{c64, dist_to_nonpositive_integer, KernelValue, SeriesControl};
use crate::quad;
use crate::C64;
use std::f64::consts::PI;

const LN_2PI_HALF: f64 = 0.918_938_533_204_672_74; // ½ ln(2π)

// Lanczos g = 7, 9-term coefficient set (GSL).
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Bernoulli numbers B_2, B_4, …, B_20.
pub const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Stirling-series policy: number of Bernoulli terms and the minimum |s|
/// before recurrence-shifting.
#[derive(Debug, Clone, Copy)]
pub struct StirlingPolicy {
    pub m: usize,
    pub shift_threshold: f64,
}

impl Default for StirlingPolicy {
    fn default() -> Self {
        StirlingPolicy {
            m: 8,
            shift_threshold: 12.0,
        }
    }
}

impl StirlingPolicy {
    pub fn validate(&self) -> Result<()> {
        if (1..=10).contains(&self.m) && self.shift_threshold >= 1.0 {
            Ok(())
        } else {
            Err(Error::Domain("invalid StirlingPolicy".into()))
        }
    }
}

fn pole_guard(s: C64, what: &str) -> Result<()> {
    if dist_to_nonpositive_integer(s) < 1e-13 * (1.0 + s.norm()) {
        Err(Error::Pole(format!("{what} at non-positive integer {s}")))
    } else {
        Ok(())
    }
}

/// Principal branch of log Γ(s).  Lanczos in the right half-plane, unwound
/// reflection for Re(s) < 0.5.
pub fn log_gamma(s: C64) -> Result<C64> {
    pole_guard(s, "log_gamma")?;
    Ok(log_gamma_unchecked(s))
}

pub(crate) fn log_gamma_unchecked(s: C64) -> C64 {
    if s.re < 0.5 {
        // logΓ(s) = log π − log sin(πs) − logΓ(1−s)
        return c64(PI.ln(), 0.0) - log_sin_pi(s) - log_gamma_unchecked(c64(1.0, 0.0) - s);
    }
    let x = s - 1.0;
    let mut t = C64::new(LANCZOS[0], 0.0);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        t += p / (x + i as f64);
    }
    let w = x + LANCZOS_G + 0.5;
    (x + 0.5) * w.ln() - w + LN_2PI_HALF + t.ln()
}

/// log sin(πz) on the branch that makes the reflected log Γ principal.
fn log_sin_pi(z: C64) -> C64 {
    if z.im < 0.0 {
        return log_sin_pi(z.conj()).conj();
    }
    // sin(πz) = −e^{−iπz}(1 − e^{2πiz})/(2i) for Im z ≥ 0
    let i = c64(0.0, 1.0);
    let expo = (c64(0.0, 2.0 * PI) * z).exp();
    -i * PI * z + (C64::new(1.0, 0.0) - expo).ln() + c64(-(2.0f64.ln()), PI / 2.0)
}

/// Γ(a)/Γ(b) as exp(logΓ(a) − logΓ(b)).
pub(crate) fn gamma_ratio(a: C64, b: C64) -> Result<C64> {
    pole_guard(a, "gamma_ratio numerator")?;
    pole_guard(b, "gamma_ratio denominator")?;
    Ok((log_gamma_unchecked(a) - log_gamma_unchecked(b)).exp())
}

/// log Γ on a branch continued by the recurrence logΓ(x) = logΓ(x+1) − log x,
/// stable arbitrarily close to the poles (where the value is just large, not
/// ill-conditioned).  Branch may differ from the principal one by 2πi·Z; use
/// only inside exp() of Gamma-ratio combinations.
pub(crate) fn log_gamma_pole_shifted(x: C64) -> Result<C64> {
    let mut corr = C64::new(0.0, 0.0);
    let mut y = x;
    let mut hops = 0;
    while dist_to_nonpositive_integer(y) < 0.35 && hops < 1_000 {
        if y.norm() < 1e-290 {
            return Err(Error::Pole(format!("Gamma argument {x} at a pole")));
        }
        corr -= y.ln();
        y += 1.0;
        hops += 1;
    }
    Ok(log_gamma_unchecked(y) + corr)
}

/// Pochhammer symbol (s)_n = Γ(s+n)/Γ(s); direct product for n ≤ 64.
pub fn pochhammer(s: C64, n: usize) -> Result<C64> {
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    if n <= 64 {
        let mut p = C64::new(1.0, 0.0);
        for k in 0..n {
            p *= s + k as f64;
        }
        return Ok(p);
    }
    gamma_ratio(s + n as f64, s)
}

/// Gauss hypergeometric 2F1(a, b; c; 1) = Γ(c)Γ(c−a−b)/(Γ(c−a)Γ(c−b)).
pub fn gauss_2f1_at_one(a: C64, b: C64, c: C64) -> Result<KernelValue> {
    let cab = c - a - b;
    if cab.re <= 0.0 {
        return Err(Error::Divergence(format!(
            "2F1 at 1 needs Re(c−a−b) > 0, got {}",
            cab.re
        )));
    }
    pole_guard(c, "2F1 parameter c")?;
    pole_guard(c - a, "2F1 parameter c−a")?;
    pole_guard(c - b, "2F1 parameter c−b")?;
    let lg = log_gamma_unchecked(c) + log_gamma_unchecked(cab)
        - log_gamma_unchecked(c - a)
        - log_gamma_unchecked(c - b);
    let v = lg.exp();
    let err = 4.0 * f64::EPSILON * (1.0 + lg.norm()) * v.norm();
    KernelValue::new(v, err).checked("gauss_2f1_at_one")
}

/// Closed form of the cosine transform of cosh^{−ν}:
/// H(r, cosh^{−ν}) = 2^{ν−1} Γ((ν−ir)/2) Γ((ν+ir)/2) / Γ(ν).
pub fn cosh_coeff(nu: C64, r: C64) -> Result<KernelValue> {
    if nu.re <= 0.0 {
        return Err(Error::Domain(format!("cosh_coeff needs Re(ν) > 0, got {nu}")));
    }
    if r.im.abs() >= nu.re {
        return Err(Error::Domain(format!(
            "cosh_coeff branch |Im r| = {} must stay below Re(ν) = {}",
            r.im.abs(),
            nu.re
        )));
    }
    let i = c64(0.0, 1.0);
    let g1 = (nu - i * r) / 2.0;
    let g2 = (nu + i * r) / 2.0;
    pole_guard(g1, "cosh_coeff Γ((ν−ir)/2)")?;
    pole_guard(g2, "cosh_coeff Γ((ν+ir)/2)")?;
    let lg = (nu - 1.0) * 2.0f64.ln() + log_gamma_unchecked(g1) + log_gamma_unchecked(g2)
        - log_gamma_unchecked(nu);
    let v = lg.exp();
    let err = 8.0 * f64::EPSILON * (1.0 + lg.norm()) * v.norm();
    KernelValue::new(v, err).checked("cosh_coeff")
}

/// A test function g on (0, ∞) with a decay certificate |g(u)| ≤ bound·e^{−rate·u}.
pub struct TestFunction {
    pub eval: Box<dyn Fn(f64) -> C64 + Send + Sync>,
    pub decay_rate: f64,
    pub bound: f64,
    pub kind: TestFunctionKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunctionKind {
    /// cosh^{−ν}(u); the wave distribution may use the closed-form transform.
    CoshPower(C64),
    Custom,
}

impl TestFunction {
    pub fn cosh_power(nu: C64) -> Self {
        TestFunction {
            eval: Box::new(move |u| {
                // cosh^{-ν}(u) = exp(−ν log cosh u), real log for u real
                (-nu * u.cosh().ln()).exp()
            }),
            decay_rate: nu.re,
            bound: 2.0f64.powf(nu.re) * (nu.im.abs() * PI / 2.0).exp(),
            kind: TestFunctionKind::CoshPower(nu),
        }
    }

    pub fn gaussian() -> Self {
        TestFunction {
            eval: Box::new(|u| c64((-u * u).exp(), 0.0)),
            // e^{-u²} ≤ e^{9} e^{-6u} on [0,∞) is wasteful; on u ≥ 3 the rate-6
            // envelope holds with bound e^9 · e^{-9}, use a practical pair
            decay_rate: 4.0,
            bound: (4.0f64).exp(),
            kind: TestFunctionKind::Custom,
        }
    }

    pub fn custom<F: Fn(f64) -> C64 + Send + Sync + 'static>(
        f: F,
        decay_rate: f64,
        bound: f64,
    ) -> Self {
        TestFunction {
            eval: Box::new(f),
            decay_rate,
            bound,
            kind: TestFunctionKind::Custom,
        }
    }

    /// Spot-check the decay certificate at a few sample points.
    pub fn check_certificate(&self) -> Result<()> {
        if !(self.decay_rate > 0.0) || !(self.bound > 0.0) {
            return Err(Error::Admissibility("non-positive decay certificate".into()));
        }
        for &u in &[0.5, 1.0, 3.0, 8.0, 20.0] {
            let envelope = self.bound * (-self.decay_rate * u).exp();
            if envelope < 1e-280 {
                break;
            }
            let g = (self.eval)(u).norm();
            if g > 1.5 * envelope + 1e-300 {
                return Err(Error::Admissibility(format!(
                    "|g({u})| = {g} exceeds certified envelope {envelope}"
                )));
            }
        }
        Ok(())
    }
}

/// Cosine transform H(r, g) = 2 ∫₀^∞ cos(ur) g(u) du by adaptive quadrature;
/// the tail bound beyond the cut point goes into the error estimate.
pub fn h_transform(r: C64, g: &TestFunction, ctrl: &SeriesControl) -> Result<KernelValue> {
    g.check_certificate()?;
    let rate = g.decay_rate - r.im.abs();
    if rate <= 0.0 {
        return Err(Error::Admissibility(format!(
            "e^{{Im(r)·u}} g(u) not integrable: decay {} vs |Im r| {}",
            g.decay_rate,
            r.im.abs()
        )));
    }
    let f = |u: f64| 2.0 * (r * u).cos() * (g.eval)(u);
    // first pass against the certificate scale, second against the value itself
    let (v1, e1) = quad::integrate_decaying(
        &f,
        rate,
        2.0 * g.bound,
        r.re,
        ctrl.quad_tol * 2.0 * g.bound,
        ctrl.max_depth,
    );
    let scale = v1.norm().max(1e-280);
    let (v, e) = if e1 > ctrl.quad_tol * scale {
        quad::integrate_decaying(&f, rate, 2.0 * g.bound, r.re, ctrl.quad_tol * scale, ctrl.max_depth)
    } else {
        (v1, e1)
    };
    if e > 1e3 * ctrl.quad_tol * v.norm().max(1e-280) {
        return Err(Error::NonConvergence(format!(
            "h_transform error {e} above tolerance at r = {r}"
        )));
    }
    KernelValue::new(v, e).checked("h_transform")
}

/// Watson-lemma endpoint estimate (b/ν)Γ(λ/ν)(ν/(ax))^{λ/ν} e^{x·h0} for
/// ∫ g(t) e^{x h(t)} dt with g ~ b t^{λ−1}, h' ~ −a t^{ν−1} at the left end.
pub fn laplace_estimate(lambda: f64, nu: f64, a: f64, b: f64, h0: f64, x: f64) -> Result<f64> {
    if lambda <= 0.0 || nu <= 0.0 || a <= 0.0 || x <= 0.0 {
        return Err(Error::Domain(
            "laplace_estimate needs positive λ, ν, a, x".into(),
        ));
    }
    let lg = log_gamma_unchecked(c64(lambda / nu, 0.0)).re;
    Ok(b / nu * lg.exp() * (nu / (a * x)).powf(lambda / nu) * (x * h0).exp())
}

/// Stirling remainder h_M(s) = log Γ(s) − main terms − M Bernoulli corrections.
pub fn stirling_remainder(s: C64, m: usize) -> Result<C64> {
    if s.re < 5.0 {
        return Err(Error::Domain(format!(
            "stirling_remainder needs Re(s) ≥ 5, got {}",
            s.re
        )));
    }
    if m > 10 {
        return Err(Error::Domain("stirling_remainder supports M ≤ 10".into()));
    }
    let mut main = s * s.ln() - s + 0.5 * (c64(2.0 * PI, 0.0) / s).ln();
    let mut spow = s; // s^{2n-1}
    for (n, &b2n) in BERNOULLI_EVEN.iter().enumerate().take(m) {
        let nn = (n + 1) as f64;
        main += b2n / (2.0 * nn * (2.0 * nn - 1.0)) / spow;
        spow *= s * s;
    }
    Ok(log_gamma_unchecked(s) - main)
}

/// log Γ via Bernoulli–Stirling series with recurrence shifting; an
/// independent route used to cross-check the Lanczos kernel.
pub fn log_gamma_stirling(s: C64, policy: &StirlingPolicy) -> Result<C64> {
    policy.validate()?;
    pole_guard(s, "log_gamma_stirling")?;
    if s.re < 0.5 {
        return Ok(c64(PI.ln(), 0.0)
            - log_sin_pi(s)
            - log_gamma_stirling(c64(1.0, 0.0) - s, policy)?);
    }
    let mut shift = C64::new(0.0, 0.0);
    let mut z = s;
    while z.norm() < policy.shift_threshold || z.re < policy.shift_threshold {
        shift += z.ln();
        z += 1.0;
    }
    let mut v = z * z.ln() - z + 0.5 * (c64(2.0 * PI, 0.0) / z).ln();
    let mut zpow = z;
    for (n, &b2n) in BERNOULLI_EVEN.iter().enumerate().take(policy.m) {
        let nn = (n + 1) as f64;
        v += b2n / (2.0 * nn * (2.0 * nn - 1.0)) / zpow;
        zpow *= z * z;
    }
    Ok(v - shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // frozen ahead of the build from 40-digit arithmetic
    const LG_10_5I: (f64, f64) = (11.54185704843638084304, 11.47210524765100086288);
    const LG_1_500I: (f64, f64) = (-781.3719208150325410026, 2608.089280707804430714);
    const LG_1000_5: f64 = 5908.674175848677488684;
    const LG_M43_21I: (f64, f64) = (-7.954743135675226409508, -11.71892009523355509663);
    const LG_M103_M77I: (f64, f64) = (-35.61805961180795656942, 15.0333171194885105865);
    const LG_01: f64 = 2.252712651734205902006;

    fn assert_lg(s: C64, want: C64) {
        let got = log_gamma(s).unwrap();
        let scale = want.norm().max(1.0);
        assert!(
            (got - want).norm() <= 1e-12 * scale,
            "logΓ({s}) = {got}, want {want}"
        );
    }

    #[test]
    fn log_gamma_trivial_points() {
        assert!(log_gamma(c64(1.0, 0.0)).unwrap().norm() < 1e-14);
        assert_relative_eq!(
            log_gamma(c64(0.5, 0.0)).unwrap().re,
            0.5 * PI.ln(),
            max_relative = 1e-14
        );
        assert!(log_gamma(c64(2.0, 0.0)).unwrap().norm() < 1e-14);
    }

    #[test]
    fn log_gamma_matches_high_precision_oracle() {
        assert_lg(c64(10.0, 5.0), c64(LG_10_5I.0, LG_10_5I.1));
        assert_lg(c64(1.0, 500.0), c64(LG_1_500I.0, LG_1_500I.1));
        assert_lg(c64(1000.5, 0.0), c64(LG_1000_5, 0.0));
        assert_lg(c64(0.1, 0.0), c64(LG_01, 0.0));
        // reflection, both half-planes
        assert_lg(c64(-4.3, 2.1), c64(LG_M43_21I.0, LG_M43_21I.1));
        assert_lg(c64(-10.3, -7.7), c64(LG_M103_M77I.0, LG_M103_M77I.1));
    }

    #[test]
    fn log_gamma_pole_rejected() {
        assert!(matches!(log_gamma(c64(0.0, 0.0)), Err(Error::Pole(_))));
        assert!(matches!(log_gamma(c64(-7.0, 0.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn log_gamma_agrees_with_stirling_route() {
        let policy = StirlingPolicy::default();
        for &s in &[c64(3.2, 1.1), c64(0.7, -2.0), c64(-2.4, 0.9), c64(17.0, 40.0)] {
            let a = log_gamma(s).unwrap();
            let b = log_gamma_stirling(s, &policy).unwrap();
            assert!((a - b).norm() < 1e-12 * a.norm().max(1.0), "{s}: {a} vs {b}");
        }
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(c64(2.7, -1.0), 0).unwrap(), c64(1.0, 0.0));
        assert_relative_eq!(pochhammer(c64(1.0, 0.0), 4).unwrap().re, 24.0);
        assert_relative_eq!(pochhammer(c64(0.5, 0.0), 2).unwrap().re, 0.75);
        // long product via Γ-ratio
        let direct: f64 = (0..70).map(|k| 1.5 + k as f64).product();
        assert_relative_eq!(
            pochhammer(c64(1.5, 0.0), 70).unwrap().re,
            direct,
            max_relative = 1e-12
        );
    }

    #[test]
    fn gauss_2f1_examples() {
        // a = 0 kills every term past k = 0
        let v = gauss_2f1_at_one(c64(0.0, 0.0), c64(1.3, 0.7), c64(2.0, 0.0)).unwrap();
        assert!((v.value - c64(1.0, 0.0)).norm() < 1e-13);

        // telescoping oracle: Σ 2/((k+1)(k+2)) = 2
        let v = gauss_2f1_at_one(c64(1.0, 0.0), c64(1.0, 0.0), c64(3.0, 0.0)).unwrap();
        let mut partial = 0.0;
        for k in 0..200_000 {
            let kk = k as f64;
            partial += 2.0 / ((kk + 1.0) * (kk + 2.0));
        }
        assert_relative_eq!(v.value.re, 2.0, max_relative = 1e-13);
        assert!((v.value.re - partial).abs() < 2e-5); // k^{-2} tail of the cap

        // paper instance at s=3, ρ0=1/2, t=1 (frozen high-precision value)
        let s = c64(3.0, 0.0);
        let t = 1.0;
        let a = (s - 0.5 - c64(0.0, t)) / 2.0;
        let b = (s - 0.5 + c64(0.0, t)) / 2.0;
        let c = s + 0.5;
        let v = gauss_2f1_at_one(a, b, c).unwrap();
        assert!((v.value - c64(2.971053083654326889597, 0.0)).norm() < 1e-12);

        assert!(matches!(
            gauss_2f1_at_one(c64(1.0, 0.0), c64(1.0, 0.0), c64(1.5, 0.0)),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn cosh_coeff_trivial_and_quadrature() {
        let v = cosh_coeff(c64(2.0, 0.0), c64(0.0, 0.0)).unwrap();
        assert!((v.value - c64(2.0, 0.0)).norm() < 1e-13);

        let v = cosh_coeff(c64(1.0, 0.0), c64(0.0, 0.0)).unwrap();
        assert_relative_eq!(v.value.re, PI, max_relative = 1e-13);

        // ν = 3, r = 1.7 against the quadrature oracle
        let ctrl = SeriesControl::default();
        let g = TestFunction::cosh_power(c64(3.0, 0.0));
        let q = h_transform(c64(1.7, 0.0), &g, &ctrl).unwrap();
        let c = cosh_coeff(c64(3.0, 0.0), c64(1.7, 0.0)).unwrap();
        assert!((q.value - c.value).norm() < 1e-9 * c.value.norm());
    }

    #[test]
    fn cosh_coeff_domain_errors() {
        assert!(matches!(
            cosh_coeff(c64(-1.0, 0.0), c64(0.0, 0.0)),
            Err(Error::Domain(_))
        ));
        // imaginary r at the edge of the strip
        assert!(matches!(
            cosh_coeff(c64(0.5, 0.0), c64(0.0, 0.6)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn h_transform_examples() {
        let ctrl = SeriesControl::default();
        let sech2 = TestFunction::cosh_power(c64(2.0, 0.0));
        let v = h_transform(c64(0.0, 0.0), &sech2, &ctrl).unwrap();
        assert!((v.value.re - 2.0).abs() < 1e-11);

        let gauss = TestFunction::gaussian();
        let v = h_transform(c64(2.0, 0.0), &gauss, &ctrl).unwrap();
        let exact = PI.sqrt() * (-1.0f64).exp();
        assert_relative_eq!(v.value.re, exact, max_relative = 1e-11);

        let sech4 = TestFunction::cosh_power(c64(4.0, 0.0));
        let v = h_transform(c64(1.0, 0.0), &sech4, &ctrl).unwrap();
        let c = cosh_coeff(c64(4.0, 0.0), c64(1.0, 0.0)).unwrap();
        assert!((v.value - c.value).norm() < 1e-9 * c.value.norm());
    }

    #[test]
    fn laplace_estimate_examples() {
        // h(t) = −log cosh t instance: λ=1, ν=2, a=1
        let e100 = laplace_estimate(1.0, 2.0, 1.0, 1.0, 0.0, 100.0).unwrap();
        assert_relative_eq!(e100, (PI / 200.0).sqrt(), max_relative = 1e-13);

        // x → 4x halves the estimate when λ/ν = 1/2
        let e400 = laplace_estimate(1.0, 2.0, 1.0, 1.0, 0.0, 400.0).unwrap();
        assert_relative_eq!(e100 / e400, 2.0, max_relative = 1e-13);

        // quadrature of ∫₀¹ e^{−x log cosh t} dt at x = 200 within 3%
        let x = 200.0;
        let (q, _) = quad::adaptive(
            &|t: f64| c64((-x * t.cosh().ln()).exp(), 0.0),
            0.0,
            1.0,
            1e-12,
            40,
            8,
        );
        let est = laplace_estimate(1.0, 2.0, 1.0, 1.0, 0.0, x).unwrap();
        assert!((q.re / est - 1.0).abs() < 0.03, "ratio {}", q.re / est);

        assert!(matches!(
            laplace_estimate(-1.0, 2.0, 1.0, 1.0, 0.0, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn stirling_remainder_examples() {
        // |h₁(10)| well below the M=0 remainder scale, decreasing in s
        let h0_10 = stirling_remainder(c64(10.0, 0.0), 0).unwrap().norm();
        let h1_10 = stirling_remainder(c64(10.0, 0.0), 1).unwrap().norm();
        assert!(h1_10 <= 1e-3 * h0_10, "h1 {h1_10} vs h0 {h0_10}");
        let h1_20 = stirling_remainder(c64(20.0, 0.0), 1).unwrap().norm();
        assert!(h1_20 < h1_10);

        // O(s^{-5}) slope for M = 2
        let h2_40 = stirling_remainder(c64(40.0, 0.0), 2).unwrap().norm();
        let h2_20 = stirling_remainder(c64(20.0, 0.0), 2).unwrap().norm();
        assert!(h2_40 / h2_20 <= 2f64.powi(-5) * 1.5);

        // more corrections shrink the remainder
        let h3 = stirling_remainder(c64(8.0, 0.0), 3).unwrap().norm();
        let h0 = stirling_remainder(c64(8.0, 0.0), 0).unwrap().norm();
        assert!(h3 < h0);

        assert!(matches!(
            stirling_remainder(c64(4.0, 0.0), 2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn functional_equation_mod_2pi() {
        // log Γ(s+1) − log Γ(s) − log s ∈ 2πi·Z on a deterministic grid
        let mut worst = 0.0f64;
        for a in 0..10 {
            for b in 0..10 {
                let s = c64(-8.0 + 1.7 * a as f64 + 0.13, -5.0 + 1.1 * b as f64 + 0.07);
                if dist_to_nonpositive_integer(s) < 1e-2 {
                    continue;
                }
                let d = log_gamma(s + 1.0).unwrap() - log_gamma(s).unwrap() - s.ln();
                let k = (d.im / (2.0 * PI)).round();
                let res = (d - c64(0.0, 2.0 * PI * k)).norm();
                worst = worst.max(res);
            }
        }
        assert!(worst < 1e-11, "worst residual {worst}");
    }
}
