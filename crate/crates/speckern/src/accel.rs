//! Series summation with certified tails.
//!
//! Two regimes: a geometric tail bound where the observed term ratio stays
//! below one, and midpoint Euler–Maclaurin tail integration where the decay
//! is algebraic (the k^{-2}-type zero-mode tails of the resolvent and
//! Eisenstein series).  The algebraic path needs the analytic interpolant of
//! the term function, which every Gamma-ratio series here provides.

use crate::error::{Error, Result};
use crate::numeric::{Kahan, KernelValue, SeriesControl};
use crate::quad;
use crate::C64;

/// Σ_{k≥m} t(k) for an analytic, algebraically-decaying term function:
/// midpoint Euler–Maclaurin, ∫_{m−1/2}^∞ t dx + t'(m−1/2)/24 + O(t''').
fn em_tail<F: Fn(f64) -> Result<C64>>(
    t: &F,
    m: usize,
    abs_tol: f64,
    max_depth: usize,
) -> Result<(C64, f64)> {
    let x0 = m as f64 - 0.5;
    // map [x0, ∞) to (0, 1] via x = x0/u
    let err_flag = std::cell::Cell::new(false);
    let integrand = |u: f64| {
        if u <= 0.0 {
            return C64::new(0.0, 0.0);
        }
        let x = x0 / u;
        match t(x) {
            Ok(v) => v * (x0 / (u * u)),
            Err(_) => {
                err_flag.set(true);
                C64::new(0.0, 0.0)
            }
        }
    };
    let (integral, qerr) = quad::adaptive(&integrand, 0.0, 1.0, abs_tol, max_depth, 8);
    if err_flag.get() {
        return Err(Error::NonConvergence("tail interpolant failed".into()));
    }
    let h = 0.5;
    let tp = (t(x0 + h)? - t(x0 - h)?) / (2.0 * h);
    let tail = integral + tp / 24.0;
    // third-derivative term is uncontrolled here; checkpoint agreement in the
    // caller is the effective error control
    Ok((tail, qerr + tp.norm() * 2e-2 / x0.max(1.0)))
}

/// Sum `term(k)` for k = 0, 1, 2, … adaptively.
///
/// `tail_interp`, when given, is the analytic extension of the term to real
/// arguments and enables the Euler–Maclaurin tail in the algebraic regime.
/// `scale` makes the relative tolerance meaningful when the sum is small
/// against its terms.
pub fn sum_series<FI, FR>(
    mut term: FI,
    tail_interp: Option<FR>,
    ctrl: &SeriesControl,
    scale: f64,
) -> Result<KernelValue>
where
    FI: FnMut(usize) -> Result<KernelValue>,
    FR: Fn(f64) -> Result<C64>,
{
    const GEO_RATIO: f64 = 0.85;
    let mut sum = Kahan::default();
    let mut term_err = 0.0;
    let mut prev_mag = f64::INFINITY;
    let mut geo_run = 0usize;
    let mut zero_run = 0usize;
    let mut next_checkpoint = 96usize;
    let mut last_estimate: Option<(C64, f64)> = None;

    for k in 0..ctrl.max_terms {
        let t = term(k)?;
        sum.add(t.value);
        term_err += t.err;
        let mag = t.value.norm();
        let reference = scale.max(sum.value().norm()).max(1e-300);

        let ratio = if prev_mag > 0.0 { mag / prev_mag } else { 0.0 };
        if mag > 0.0 && ratio < GEO_RATIO {
            geo_run += 1;
        } else {
            geo_run = 0;
        }
        prev_mag = mag;
        zero_run = if mag == 0.0 { zero_run + 1 } else { 0 };

        // exactly terminating or fully underflowed series
        if zero_run > 8 {
            return KernelValue::new(sum.value(), term_err).checked("series");
        }
        // geometric regime with a certified tail bound
        if k >= 3 && geo_run >= 3 {
            let r = ratio.max(1e-12);
            let tail = mag * r / (1.0 - r.min(GEO_RATIO));
            if tail <= ctrl.tol * reference {
                return KernelValue::new(sum.value(), term_err + tail).checked("series");
            }
        }
        // algebraic regime: Euler–Maclaurin tail at increasing checkpoints,
        // accepted once two checkpoints agree
        if k + 1 == next_checkpoint {
            next_checkpoint += next_checkpoint / 2;
            if let Some(t_real) = tail_interp.as_ref() {
                if geo_run == 0 && mag > 0.0 {
                    let abs_tol = 0.1 * ctrl.tol * reference;
                    // the interpolant may drop exponentially-small parts of the
                    // term; measure the defect on the last exact term and
                    // charge it across the tail length
                    let defect = match t_real(k as f64) {
                        Ok(ti) => (ti - t.value).norm() * 3.0 * k as f64,
                        Err(_) => f64::INFINITY,
                    };
                    if defect.is_finite() {
                        if let Ok((tail, terr)) = em_tail(t_real, k + 1, abs_tol, ctrl.max_depth)
                        {
                            let estimate = sum.value() + tail;
                            let terr = terr + defect;
                            if let Some((prev_est, _)) = last_estimate {
                                let disc = (estimate - prev_est).norm();
                                if disc + terr <= ctrl.tol * reference {
                                    return KernelValue::new(estimate, term_err + disc + terr)
                                        .checked("series");
                                }
                            }
                            last_estimate = Some((estimate, terr));
                        }
                    }
                }
            }
        }
    }
    // cap reached: accept a stable Euler–Maclaurin estimate with its
    // discrepancy, otherwise report non-convergence
    if let (Some((est, terr)), Some(t_real)) = (last_estimate, tail_interp.as_ref()) {
        if let Ok((tail, terr2)) = em_tail(t_real, ctrl.max_terms, ctrl.tol, ctrl.max_depth) {
            let estimate = sum.value() + tail;
            let disc = (estimate - est).norm();
            let reference = scale.max(estimate.norm()).max(1e-300);
            if disc <= 1e3 * ctrl.tol * reference {
                return KernelValue::new(estimate, term_err + disc + terr + terr2)
                    .checked("series");
            }
        }
    }
    Err(Error::NonConvergence(format!(
        "series cap {} reached without meeting tol {}",
        ctrl.max_terms, ctrl.tol
    )))
}

/// Geometric-only summation for series without an analytic interpolant.
pub fn sum_series_geometric<FI>(term: FI, ctrl: &SeriesControl, scale: f64) -> Result<KernelValue>
where
    FI: FnMut(usize) -> Result<KernelValue>,
{
    sum_series(term, None::<fn(f64) -> Result<C64>>, ctrl, scale)
}
