//! Shared numeric plumbing: kernel values with error estimates, series
//! controls, and small helpers used across the evaluators.

use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};

/// A complex value together with an a-posteriori error bound
/// (truncation + quadrature, worst-case additive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: C64,
    pub err: f64,
}

impl KernelValue {
    pub fn new(value: C64, err: f64) -> Self {
        KernelValue { value, err }
    }

    pub fn exact(value: C64) -> Self {
        KernelValue { value, err: 0.0 }
    }

    /// Fails if the value or the bound is not finite.
    pub fn checked(self, what: &str) -> Result<Self> {
        if self.value.re.is_finite() && self.value.im.is_finite() && self.err.is_finite() {
            Ok(self)
        } else {
            Err(Error::Evaluation(format!("non-finite result in {what}")))
        }
    }
}

/// Truncation and quadrature policy shared by all series operations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SeriesControl {
    /// Relative tail target for series truncation.
    pub tol: f64,
    /// Hard cap on series terms.
    pub max_terms: usize,
    /// Relative tolerance for adaptive quadrature.
    pub quad_tol: f64,
    /// Maximum bisection depth for adaptive quadrature.
    pub max_depth: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            tol: 1e-11,
            max_terms: 200_000,
            quad_tol: 1e-11,
            max_depth: 50,
        }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tol > 0.0
            && self.tol < 1.0
            && self.quad_tol > 0.0
            && self.quad_tol < 1.0
            && self.max_terms > 0
            && self.max_depth > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("invalid SeriesControl".into()))
        }
    }
}

/// Compensated (Kahan) accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: C64,
    c: C64,
}

impl Kahan {
    pub fn add(&mut self, x: C64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> C64 {
        self.sum
    }
}

/// Distance from `z` to the nearest non-positive integer.
pub fn dist_to_nonpositive_integer(z: C64) -> f64 {
    if z.re > 0.5 {
        return (z.re * z.re + z.im * z.im).sqrt().max(0.5);
    }
    let n = z.re.round().min(0.0);
    ((z.re - n).powi(2) + z.im * z.im).sqrt()
}

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
