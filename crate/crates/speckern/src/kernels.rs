//! Heat kernel (spectral and lattice-image representations), the translated
//! Poisson kernel, and the wave-distribution pairing.

use crate::error::{Error, Result};
use crate::numeric::{c64, Kahan, KernelValue, SeriesControl};
use crate::quad;
use crate::specfun::{cosh_coeff, h_transform, TestFunction, TestFunctionKind};
use crate::spectra::{GeometryKind, RhoParameter, Spectrum, TorusGeometry};
use crate::C64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatMethod {
    Spectral,
    Images,
    /// Images below the crossover time, spectral above.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonMethod {
    Spectral,
    Integral,
    Images,
}

/// Crossover policy: images pay off while t < 0.2·(shortest lattice vector)².
pub fn heat_crossover_time(geom: &TorusGeometry) -> f64 {
    let d = 2 * geom.n;
    let mut min2 = f64::INFINITY;
    let mut coeffs = vec![0i64; d];
    fn rec(geom: &TorusGeometry, coeffs: &mut Vec<i64>, i: usize, min2: &mut f64) {
        if i == coeffs.len() {
            if coeffs.iter().any(|&c| c != 0) {
                let v = geom.lattice_vector(coeffs);
                let n2: f64 = v.iter().map(|x| x * x).sum();
                *min2 = min2.min(n2);
            }
            return;
        }
        for c in -2..=2 {
            coeffs[i] = c;
            rec(geom, coeffs, i + 1, min2);
        }
    }
    rec(geom, &mut coeffs, 0, &mut min2);
    0.2 * min2
}

/// Weyl-law density of eigenvalues per unit λ near the cutoff, for
/// beyond-cutoff tail bounds.
fn eigenvalue_density(spectrum: &Spectrum) -> f64 {
    match &spectrum.kind {
        GeometryKind::Torus(g) => {
            let n = g.n as i32;
            if n == 1 {
                spectrum.vol / (4.0 * PI)
            } else {
                let ball = PI.powi(n) / (1..=n as u64).product::<u64>() as f64;
                let c = (2.0 * PI).powi(-2 * n) * ball * spectrum.vol;
                n as f64 * c * spectrum.cutoff.powi(n - 1).max(1.0)
            }
        }
        // ~1/4 states per unit λ with sup of the radial profile ≈ mult/π
        GeometryKind::Cp1 => 0.25,
        GeometryKind::Toy { .. } => 0.0,
    }
}

/// Heat kernel K(z,w;t) = Σ e^{−λt} ψ(z)ψ̄(w) or its lattice-image form.
pub fn heat_kernel(
    spectrum: &Spectrum,
    z: &[f64],
    w: &[f64],
    t: f64,
    method: HeatMethod,
    ctrl: &SeriesControl,
) -> Result<KernelValue> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    ctrl.validate()?;
    match method {
        HeatMethod::Spectral => heat_spectral(spectrum, z, w, t, ctrl),
        HeatMethod::Images => heat_images(spectrum, z, w, t, ctrl),
        HeatMethod::Auto => match &spectrum.kind {
            GeometryKind::Torus(g) if t < heat_crossover_time(g) => {
                heat_images(spectrum, z, w, t, ctrl)
            }
            _ => heat_spectral(spectrum, z, w, t, ctrl),
        },
    }
}

fn heat_spectral(
    spectrum: &Spectrum,
    z: &[f64],
    w: &[f64],
    t: f64,
    ctrl: &SeriesControl,
) -> Result<KernelValue> {
    let mut sum = Kahan::default();
    let n = spectrum.len();
    let mut tail_in = 0.0;
    let mut rest: usize = spectrum.data.iter().map(|d| d.mult).sum();
    for (j, d) in spectrum.data.iter().enumerate() {
        let factor = (-d.lambda * t).exp();
        sum.add(spectrum.pair_weight(j, z, w) * factor);
        rest -= d.mult;
        if j + 1 < n {
            let next = &spectrum.data[j + 1];
            tail_in = (-next.lambda * t).exp() * rest as f64 / spectrum.vol;
            if tail_in < ctrl.tol * sum.value().norm().max(1e-300) {
                break;
            }
        } else {
            tail_in = 0.0;
        }
    }
    let density = eigenvalue_density(spectrum);
    let tail_out = 2.0 * density * (-spectrum.cutoff * t).exp() / (t * spectrum.vol);
    let err = tail_in.min(1.0 / spectrum.vol) + tail_out;
    let v = KernelValue::new(sum.value(), err).checked("heat_kernel spectral")?;
    if err > 1e3 * ctrl.tol.max(1e-12) * v.value.norm().max(1e-12) {
        return Err(Error::NonConvergence(format!(
            "heat spectral tail bound {err} too large at cutoff {} (t = {t})",
            spectrum.cutoff
        )));
    }
    Ok(v)
}

/// All lattice vectors within `radius` of the point `x` (coefficient box).
fn lattice_box(geom: &TorusGeometry, radius: f64, x: &[f64]) -> Vec<Vec<f64>> {
    let d = 2 * geom.n;
    let mut ranges = Vec::with_capacity(d);
    for i in 0..d {
        // coefficient i of point y is ⟨dual column i, y⟩
        let col_norm: f64 = (0..d).map(|k| geom.dual_basis[k][i].powi(2)).sum::<f64>().sqrt();
        let center: f64 = (0..d).map(|k| geom.dual_basis[k][i] * x[k]).sum();
        let half = radius * col_norm + 1.0;
        ranges.push(((center - half).floor() as i64, (center + half).ceil() as i64));
    }
    let mut out = Vec::new();
    let mut coeffs = vec![0i64; d];
    fn rec(
        geom: &TorusGeometry,
        ranges: &[(i64, i64)],
        coeffs: &mut Vec<i64>,
        i: usize,
        out: &mut Vec<Vec<f64>>,
    ) {
        if i == ranges.len() {
            out.push(geom.lattice_vector(coeffs));
            return;
        }
        for c in ranges[i].0..=ranges[i].1 {
            coeffs[i] = c;
            rec(geom, ranges, coeffs, i + 1, out);
        }
    }
    rec(geom, &ranges, &mut coeffs, 0, &mut out);
    out
}

fn heat_images(
    spectrum: &Spectrum,
    z: &[f64],
    w: &[f64],
    t: f64,
    ctrl: &SeriesControl,
) -> Result<KernelValue> {
    let GeometryKind::Torus(geom) = &spectrum.kind else {
        return Err(Error::MethodMismatch(
            "images heat kernel needs a torus geometry".into(),
        ));
    };
    let d = 2 * geom.n;
    let x: Vec<f64> = (0..d).map(|i| z[i] - w[i]).collect();
    let logterm = (1.0 / (ctrl.tol.min(1e-10) * spectrum.vol)).ln().max(10.0);
    let radius = (4.0 * t * (logterm + 5.0)).sqrt();
    let pref = (4.0 * PI * t).powi(-(geom.n as i32));
    let mut sum = 0.0;
    for v in lattice_box(geom, radius, &x) {
        let dist2: f64 = x.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum();
        if dist2 <= radius * radius {
            sum += pref * (-dist2 / (4.0 * t)).exp();
        }
    }
    let err = 2.0 * (-radius * radius / (4.0 * t)).exp() / spectrum.vol;
    KernelValue::new(c64(sum, 0.0), err).checked("heat_kernel images")
}

fn branch_sqrt(lambda: f64, shift: C64, rho: &RhoParameter) -> Result<C64> {
    if (shift + rho.rho0 * rho.rho0).norm() <= 1e-12 * (1.0 + rho.rho0 * rho.rho0) {
        // the continuation to Z = −ρ0², branch through the upper half-plane
        return Ok(rho.branch_t(lambda));
    }
    let arg = shift + lambda;
    if arg.im.abs() < 1e-14 * (1.0 + arg.re.abs()) && arg.re < 0.0 {
        return Err(Error::Branch(format!(
            "λ + Z = {arg} crosses the principal square-root cut"
        )));
    }
    Ok(arg.sqrt())
}

/// Translated Poisson kernel P_{X,−Z}(z,w;u).
#[allow(clippy::too_many_arguments)]
pub fn poisson_kernel(
    spectrum: &Spectrum,
    rho: &RhoParameter,
    translation_z: C64,
    z: &[f64],
    w: &[f64],
    u: C64,
    method: PoissonMethod,
    ctrl: &SeriesControl,
) -> Result<KernelValue> {
    if u.re <= 0.0 {
        return Err(Error::Domain(format!("Poisson kernel needs Re(u) > 0, got {u}")));
    }
    ctrl.validate()?;
    match method {
        PoissonMethod::Spectral => poisson_spectral(spectrum, rho, translation_z, z, w, u, ctrl),
        PoissonMethod::Integral => poisson_integral(spectrum, rho, translation_z, z, w, u, ctrl),
        PoissonMethod::Images => poisson_images(spectrum, translation_z, z, w, u, ctrl),
    }
}

fn poisson_spectral(
    spectrum: &Spectrum,
    rho: &RhoParameter,
    shift: C64,
    z: &[f64],
    w: &[f64],
    u: C64,
    ctrl: &SeriesControl,
) -> Result<KernelValue> {
    let mut sum = Kahan::default();
    let n = spectrum.len();
    let mut tail_in = 0.0;
    let mut rest: usize = spectrum.data.iter().map(|d| d.mult).sum();
    for (j, d) in spectrum.data.iter().enumerate() {
        let root = branch_sqrt(d.lambda, shift, rho)?;
        sum.add(spectrum.pair_weight(j, z, w) * (-u * root).exp());
        rest -= d.mult;
        if j + 1 < n {
            let next = spectrum.data[j + 1].lambda;
            let decay = (-(u * branch_sqrt(next, shift, rho)?).re).exp();
            tail_in = decay * rest as f64 / spectrum.vol;
            if tail_in < ctrl.tol * sum.value().norm().max(1e-300) {
                break;
            }
        } else {
            tail_in = 0.0;
        }
    }
    let a = u.re;
    let sl = spectrum.cutoff.sqrt();
    let density = eigenvalue_density(spectrum);
    let tail_out = 4.0 * density / spectrum.vol * (sl * a + 1.0) * (-a * sl).exp() / (a * a);
    let err = tail_in.min(1.0 / spectrum.vol) + tail_out;
    let v = KernelValue::new(sum.value(), err).checked("poisson spectral")?;
    if err > 1e3 * ctrl.tol.max(1e-12) * v.value.norm().max(1e-12) {
        return Err(Error::NonConvergence(format!(
            "Poisson spectral tail bound {err} too large at cutoff {} (u = {u})",
            spectrum.cutoff
        )));
    }
    Ok(v)
}

/// Quadrature of the defining transform with the zero mode in closed form,
/// which keeps the translated range Re(Z) > −λ₁ accessible.
fn poisson_integral(
    spectrum: &Spectrum,
    rho: &RhoParameter,
    shift: C64,
    z: &[f64],
    w: &[f64],
    u: C64,
    ctrl: &SeriesControl,
) -> Result<KernelValue> {
    let lambda1 = spectrum
        .data
        .iter()
        .map(|d| d.lambda)
        .find(|&l| l > 1e-12)
        .unwrap_or(f64::INFINITY);
    if shift.re <= -0.8 * lambda1 {
        return Err(Error::Domain(format!(
            "integral method needs Re(Z) > {}, got {}",
            -0.8 * lambda1,
            shift.re
        )));
    }
    let pref = u / (4.0 * PI).sqrt();
    let vol = spectrum.vol;
    let heat_err = std::cell::Cell::new(0.0f64);
    let failed = std::cell::Cell::new(false);
    let f = |t: f64| -> C64 {
        if t <= 0.0 {
            return c64(0.0, 0.0);
        }
        match heat_kernel(spectrum, z, w, t, HeatMethod::Auto, ctrl) {
            Ok(k) => {
                heat_err.set(heat_err.get() + k.err);
                (k.value - 1.0 / vol)
                    * (-shift * t).exp()
                    * (-u * u / (4.0 * t)).exp()
                    * t.powf(-1.5)
            }
            Err(_) => {
                failed.set(true);
                c64(0.0, 0.0)
            }
        }
    };
    let zero_mode = (-u * branch_sqrt(0.0, shift, rho)?).exp() / vol;
    let abs_tol = ctrl.quad_tol * zero_mode.norm().max(1e-12);
    // split at t = 1, substitute t → 1/τ on the tail
    let (head, e1) = quad::adaptive(&f, 0.0, 1.0, abs_tol, ctrl.max_depth, 16);
    let g = |tau: f64| -> C64 {
        if tau <= 0.0 {
            return c64(0.0, 0.0);
        }
        let t = 1.0 / tau;
        f(t) * t * t
    };
    let (tail, e2) = quad::adaptive(&g, 0.0, 1.0, abs_tol, ctrl.max_depth, 16);
    if failed.get() {
        return Err(Error::NonConvergence(
            "heat kernel failed inside the Poisson integral".into(),
        ));
    }
    let v = pref * (head + tail) + zero_mode;
    KernelValue::new(v, (e1 + e2 + heat_err.get()) * pref.norm().max(1.0))
        .checked("poisson integral")
}

/// Closed-form image sum (torus, Z = 0):
/// Σ_v u Γ(N+1/2) π^{−(N+1/2)} (u² + ‖x−v‖²)^{−(N+1/2)}, with a midpoint
/// Euler–Maclaurin tail for the algebraic lattice remainder.
fn poisson_images(
    spectrum: &Spectrum,
    shift: C64,
    z: &[f64],
    w: &[f64],
    u: C64,
    ctrl: &SeriesControl,
) -> Result<KernelValue> {
    let GeometryKind::Torus(geom) = &spectrum.kind else {
        return Err(Error::MethodMismatch("images Poisson needs a torus".into()));
    };
    if shift.norm() > 1e-12 {
        return Err(Error::MethodMismatch(
            "images Poisson is the Z = 0 closed form".into(),
        ));
    }
    if u.im.abs() > 1e-12 * u.re.abs() {
        return Err(Error::MethodMismatch("images Poisson needs real u".into()));
    }
    let n = geom.n as i32;
    let u = u.re;
    let d = 2 * geom.n;
    let x: Vec<f64> = (0..d).map(|i| z[i] - w[i]).collect();
    let half = n as f64 + 0.5;
    let gamma_half = crate::specfun::log_gamma_unchecked(c64(half, 0.0)).re.exp();
    let cst = gamma_half / PI.powf(half);

    let radius = if n == 1 {
        (u.abs().max(1e-3) / ctrl.tol.max(1e-12)).powf(0.2).clamp(30.0, 400.0)
    } else {
        60.0
    };
    let mut sum = 0.0;
    for v in lattice_box(geom, radius, &x) {
        let dist2: f64 = x.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum();
        if dist2 <= radius * radius {
            sum += cst * u / (u * u + dist2).powf(half);
        }
    }
    let (corr, err) = if n == 1 {
        // Σ_far f ≈ ∫_far f − (1/24)∮ ∂_ρ f, per unit covolume
        let f_int = u / ((u * u + radius * radius).sqrt() * spectrum.vol);
        let fp = -3.0 * u * radius / (2.0 * PI * (u * u + radius * radius).powf(2.5));
        let flux = 2.0 * PI * radius * fp / spectrum.vol;
        (f_int - flux / 24.0, 40.0 * u / radius.powi(5) + 1e-15 * sum)
    } else {
        (0.0, u / radius.powi(2 * n - 1))
    };
    KernelValue::new(c64(sum + corr, 0.0), err).checked("poisson images")
}

/// Wave distribution applied to a test function:
/// Σ_j H(t_j, g) ψ_j(z) ψ̄_j(w), with the closed-form transform for cosh
/// powers and quadrature otherwise.
pub fn wave_apply(
    spectrum: &Spectrum,
    rho: &RhoParameter,
    z: &[f64],
    w: &[f64],
    g: &TestFunction,
    ctrl: &SeriesControl,
) -> Result<KernelValue> {
    g.check_certificate()?;
    if g.decay_rate <= rho.rho0 {
        return Err(Error::Admissibility(format!(
            "wave distribution needs decay rate {} > ρ0 = {}",
            g.decay_rate, rho.rho0
        )));
    }
    ctrl.validate()?;
    let mut sum = Kahan::default();
    let mut err = 0.0;
    let mut last_h = f64::INFINITY;
    let mut decay_run = 0usize;
    let mut rest: usize = spectrum.data.iter().map(|d| d.mult).sum();
    for (j, d) in spectrum.data.iter().enumerate() {
        let t = rho.branch_t(d.lambda);
        let h = match g.kind {
            TestFunctionKind::CoshPower(nu) => cosh_coeff(nu, t)?,
            TestFunctionKind::Custom => h_transform(t, g, ctrl)?,
        };
        sum.add(spectrum.pair_weight(j, z, w) * h.value);
        err += h.err / spectrum.vol;
        rest -= d.mult;
        let mag = h.value.norm();
        decay_run = if mag < last_h { decay_run + 1 } else { 0 };
        last_h = mag;
        if decay_run >= 3 && j + 1 < spectrum.len() {
            let tail = mag * rest as f64 / spectrum.vol;
            if tail < ctrl.tol * sum.value().norm().max(1e-300) {
                return KernelValue::new(sum.value(), err + tail).checked("wave_apply");
            }
        }
    }
    // whole spectrum consumed: report the observed floor as the tail estimate
    if last_h.is_finite() {
        err += last_h * 10.0 / spectrum.vol;
    }
    KernelValue::new(sum.value(), err).checked("wave_apply")
}
