//! The building block K(z,w;s): spectral evaluation for Re(s) > 2ρ0,
//! strip-by-strip continuation, and the difference-differential equation
//! (Δ + s(s−2ρ0))K(s) = s(s+1)K(s+2).
//!
//! Per-mode spectral coefficient, written without the internal Γ(ν) so the
//! wave-distribution prefactor is already absorbed:
//!
//! ```text
//! κ_j(σ) = 2^{σ−ρ0−1} Γ((σ−ρ0−it_j)/2) Γ((σ−ρ0+it_j)/2) / Γ(σ),
//! K(z,w;σ) = Σ_j κ_j(σ) ψ_j(z)ψ̄_j(w),
//! κ_j(σ+2)/κ_j(σ) = ((σ−ρ0)² + t_j²)/(σ(σ+1)).
//! ```
//!
//! The ratio identity is what the resolvent and Eisenstein series iterate on.

use crate::error::{Error, Result};
use crate::numeric::{c64, dist_to_nonpositive_integer, Kahan, KernelValue, SeriesControl};
use crate::specfun::{cosh_coeff, log_gamma_pole_shifted, pochhammer};
use crate::spectra::{RhoParameter, Spectrum};
use crate::C64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Default refusal radius around the poles s = ρ0 ± it_j − 2m.
pub const POLE_EXCLUSION_RADIUS: f64 = 1e-3;

/// The pair (spectrum, ρ0) that the function K depends on, plus evaluation
/// controls.
#[derive(Clone)]
pub struct KFunctionContext {
    pub spectrum: Arc<Spectrum>,
    pub rho: RhoParameter,
    pub ctrl: SeriesControl,
    pub pole_exclusion: f64,
}

impl KFunctionContext {
    pub fn new(spectrum: Arc<Spectrum>, rho: RhoParameter, ctrl: SeriesControl) -> Result<Self> {
        ctrl.validate()?;
        if spectrum.is_empty() {
            return Err(Error::Domain("empty spectrum".into()));
        }
        if spectrum.data[0].lambda.abs() > 1e-12 {
            return Err(Error::Domain("spectrum must contain the constant mode".into()));
        }
        Ok(KFunctionContext {
            spectrum,
            rho,
            ctrl,
            pole_exclusion: POLE_EXCLUSION_RADIUS,
        })
    }
}

/// Precomputed pair data for one (z, w): weights ψ_j(z)ψ̄_j(w), branch values
/// t_j, eigenvalues, and the minimum-image separation.
pub(crate) struct PairData {
    pub weights: Vec<C64>,
    pub t: Vec<C64>,
    pub lambda: Vec<f64>,
    pub mult: Vec<usize>,
    pub vol: f64,
    pub distance: f64,
}

impl PairData {
    pub fn new(spectrum: &Spectrum, rho: &RhoParameter, z: &[f64], w: &[f64]) -> Self {
        let n = spectrum.len();
        let mut weights = Vec::with_capacity(n);
        let mut t = Vec::with_capacity(n);
        let mut lambda = Vec::with_capacity(n);
        let mut mult = Vec::with_capacity(n);
        for (j, d) in spectrum.data.iter().enumerate() {
            weights.push(spectrum.pair_weight(j, z, w));
            t.push(rho.branch_t(d.lambda));
            lambda.push(d.lambda);
            mult.push(d.mult);
        }
        PairData {
            weights,
            t,
            lambda,
            mult,
            vol: spectrum.vol,
            distance: spectrum.distance(z, w),
        }
    }

    /// Indices kept by the algebraic-tail interpolant: the small-eigenvalue
    /// modes dominate K(s+2k) as k → ∞ while the rest cancels like e^{−d²k}
    /// (whole spectrum for toy geometries, where nothing cancels).
    pub fn interp_modes(&self, rho0: f64) -> Vec<usize> {
        if self.weights.len() <= 32 || !self.distance.is_finite() {
            return (0..self.weights.len()).collect();
        }
        let cut = (rho0 * rho0).max(1e-9);
        (0..self.weights.len())
            .filter(|&j| self.lambda[j] <= cut)
            .collect()
    }
}

/// log κ_j(σ) via pole-shifted log-Gamma.
fn kappa_log(sigma: C64, rho0: f64, t: C64) -> Result<C64> {
    let nu = sigma - rho0;
    let i = c64(0.0, 1.0);
    Ok((nu - 1.0) * 2.0f64.ln()
        + log_gamma_pole_shifted((nu - i * t) / 2.0)?
        + log_gamma_pole_shifted((nu + i * t) / 2.0)?
        - log_gamma_pole_shifted(sigma)?)
}

pub(crate) fn kappa(sigma: C64, rho0: f64, t: C64) -> Result<C64> {
    Ok(kappa_log(sigma, rho0, t)?.exp())
}

/// Refuse evaluation near the continued function's poles s = ρ0 ± it_j − 2m,
/// except where the zero of 1/Γ(s) at a non-positive integer cancels them.
fn pole_proximity_check(pair: &PairData, rho0: f64, s: C64, exclusion: f64) -> Result<()> {
    let cancel_available = dist_to_nonpositive_integer(s) < exclusion;
    let nu = s - rho0;
    let i = c64(0.0, 1.0);
    for &t in &pair.t {
        for arg in [(nu - i * t) / 2.0, (nu + i * t) / 2.0] {
            // distance in s-units is twice the argument distance
            if 2.0 * dist_to_nonpositive_integer(arg) < exclusion && !cancel_available {
                return Err(Error::PoleProximity(format!(
                    "s = {s} within {exclusion} of a pole ρ0 ± it_j − 2m (t_j = {t})"
                )));
            }
        }
    }
    Ok(())
}

/// Beyond-cutoff tail bound for Σ κ_j ψψ̄: the coefficient decays like
/// e^{−πt/2} t^{Re ν −1} once t ≳ |ν|; summed against the Weyl density in t.
fn tail_bound_beyond_cutoff(pair: &PairData, kappa_last: f64, nu: C64, lambda_weighted: bool) -> f64 {
    let t_max = match pair.t.last() {
        Some(t) => t.re.max(1.0),
        None => return 0.0,
    };
    if t_max < nu.norm() {
        // asymptotic decay not yet active: refuse to certify smallness
        return kappa_last * 10.0 * pair.vol.recip() * (1.0 + t_max * t_max);
    }
    // dN/dt ≈ vol·t/(2π) on N = 1 geometries
    let mut bound = 0.0;
    let a = nu.re - 1.0;
    for step in 0..200 {
        let t = t_max + step as f64;
        let mut term = (-(PI / 2.0) * (t - t_max)).exp() * (t / t_max).powf(a.max(0.0)) * t
            / (2.0 * PI);
        if lambda_weighted {
            term *= t * t + 1.0;
        }
        bound += term;
        if term < 1e-18 * bound {
            break;
        }
    }
    kappa_last * bound / pair.vol * 4.0
}

/// Core spectral sum Σ_j κ_j(s) [λ_j] ψ_j ψ̄_j with adaptive truncation.
pub(crate) fn k_core(
    pair: &PairData,
    rho0: f64,
    s: C64,
    ctrl: &SeriesControl,
    lambda_weighted: bool,
) -> Result<KernelValue> {
    let mut sum = Kahan::default();
    let n = pair.weights.len();
    let mut rest: usize = pair.mult.iter().sum();
    let mut decay_run = 0usize;
    let mut last_mag = f64::INFINITY;
    let mut kappa_last = 0.0;
    let nu = s - rho0;
    for j in 0..n {
        let k = kappa(s, rho0, pair.t[j])?;
        let weight = if lambda_weighted { pair.lambda[j] } else { 1.0 };
        sum.add(k * pair.weights[j] * weight);
        rest -= pair.mult[j];
        let mag = k.norm() * weight.max(1.0);
        kappa_last = k.norm();
        decay_run = if mag < last_mag { decay_run + 1 } else { 0 };
        last_mag = mag;
        // truncate once the decay regime is active and the remaining mass is
        // certified below tolerance
        if decay_run >= 4 && pair.t[j].re > nu.norm() + 2.0 && j + 1 < n {
            let tail = mag * rest as f64 / pair.vol;
            if tail < ctrl.tol * sum.value().norm().max(1e-300) {
                return KernelValue::new(sum.value(), tail).checked("k_core");
            }
        }
    }
    let tail_out = tail_bound_beyond_cutoff(pair, kappa_last, nu, lambda_weighted);
    KernelValue::new(sum.value(), tail_out).checked("k_core")
}

/// K(z,w;s) in the convergence half-plane Re(s) > 2ρ0.
pub fn k_value(ctx: &KFunctionContext, z: &[f64], w: &[f64], s: C64) -> Result<KernelValue> {
    if s.re <= 2.0 * ctx.rho.rho0 {
        return Err(Error::Domain(format!(
            "k_value needs Re(s) > 2ρ0 = {}, got {}",
            2.0 * ctx.rho.rho0,
            s.re
        )));
    }
    let pair = PairData::new(&ctx.spectrum, &ctx.rho, z, w);
    pole_proximity_check(&pair, ctx.rho.rho0, s, ctx.pole_exclusion)?;
    let v = k_core(&pair, ctx.rho.rho0, s, &ctx.ctrl, false)?;
    if v.err > 1e3 * ctx.ctrl.tol * v.value.norm().max(1e-12) {
        return Err(Error::NonConvergence(format!(
            "K tail bound {} too large at cutoff {}; raise the spectrum cutoff",
            v.err, ctx.spectrum.cutoff
        )));
    }
    Ok(v)
}

/// Strip continuation: for Re(s) > 2ρ0 − 2n,
/// K(s) = 2^{−2n} Γ(ν+2n)/Γ(s) Σ_j H(t_j, cosh^{−(ν+2n)}) / Q_n(t_j, ν) ψψ̄,
/// Q_n(r,ν) = ((ν+ir)/2)_n ((ν−ir)/2)_n.
pub fn k_continued(
    ctx: &KFunctionContext,
    z: &[f64],
    w: &[f64],
    s: C64,
    n: usize,
) -> Result<KernelValue> {
    let rho0 = ctx.rho.rho0;
    if s.re <= 2.0 * rho0 - 2.0 * n as f64 {
        return Err(Error::Domain(format!(
            "k_continued with n = {n} covers Re(s) > {}, got {}",
            2.0 * rho0 - 2.0 * n as f64,
            s.re
        )));
    }
    let pair = PairData::new(&ctx.spectrum, &ctx.rho, z, w);
    pole_proximity_check(&pair, rho0, s, ctx.pole_exclusion)?;
    if n == 0 {
        return k_core(&pair, rho0, s, &ctx.ctrl, false);
    }
    let nu = s - rho0;
    let shifted = nu + 2.0 * n as f64;
    let global = (-2.0 * n as f64 * 2.0f64.ln()
        + log_gamma_pole_shifted(shifted)?
        - log_gamma_pole_shifted(s)?)
    .exp();
    let i = c64(0.0, 1.0);
    let mut sum = Kahan::default();
    let nmodes = pair.weights.len();
    let mut rest: usize = pair.mult.iter().sum();
    let mut err = 0.0;
    let mut decay_run = 0usize;
    let mut last_mag = f64::INFINITY;
    for j in 0..nmodes {
        let t = pair.t[j];
        let h = cosh_coeff(shifted, t)?;
        let q = pochhammer((nu + i * t) / 2.0, n)? * pochhammer((nu - i * t) / 2.0, n)?;
        let term = h.value / q * pair.weights[j];
        sum.add(term);
        err += h.err / q.norm().max(1e-300) / pair.vol;
        rest -= pair.mult[j];
        let mag = term.norm();
        decay_run = if mag < last_mag { decay_run + 1 } else { 0 };
        last_mag = mag;
        if decay_run >= 4 && t.re > shifted.norm() + 2.0 && j + 1 < nmodes {
            let tail = mag * rest as f64;
            if tail < ctx.ctrl.tol * sum.value().norm().max(1e-300) {
                err += tail;
                break;
            }
        }
    }
    let v = global * sum.value();
    KernelValue::new(v, err * global.norm()).checked("k_continued")
}

/// Residual of (Δ + s(s−2ρ0))K(s) = s(s+1)K(s+2), all three spectral sums
/// evaluated independently.
pub fn k_ddeq_residual(ctx: &KFunctionContext, z: &[f64], w: &[f64], s: C64) -> Result<f64> {
    let rho0 = ctx.rho.rho0;
    if s.re <= 2.0 * rho0 {
        return Err(Error::Domain(format!(
            "k_ddeq_residual needs Re(s) > 2ρ0, got {}",
            s.re
        )));
    }
    let pair = PairData::new(&ctx.spectrum, &ctx.rho, z, w);
    pole_proximity_check(&pair, rho0, s, ctx.pole_exclusion)?;
    let k_s = k_core(&pair, rho0, s, &ctx.ctrl, false)?;
    let k_lap = k_core(&pair, rho0, s, &ctx.ctrl, true)?;
    let k_s2 = k_core(&pair, rho0, s + 2.0, &ctx.ctrl, false)?;
    let lhs = k_lap.value + s * (s - 2.0 * rho0) * k_s.value;
    let rhs = s * (s + 1.0) * k_s2.value;
    Ok((lhs - rhs).norm())
}
