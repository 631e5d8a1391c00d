//! Truncated Laplace spectra with eigenfunction evaluators for flat complex
//! tori and CP¹ (plus explicit toy spectra for closed-form tests).
//!
//! Convention: the real Riemannian Laplacian with non-negative spectrum, so a
//! torus ℂ^N/(ℤ^N + Ωℤ^N) has eigenvalues 4π²‖m*‖² over dual-lattice vectors
//! and eigenfunctions vol^{−1/2} e^{2πi⟨m*,x⟩}; CP¹ carries λ_ℓ = 4ℓ(ℓ+1)
//! with the radial profile θ_ℓ of the Fubini–Study heat kernel.

use crate::error::{Error, Result};
use crate::numeric::{c64, SeriesControl};
use crate::quad;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_MODE_CAP: usize = 4_000_000;

/// Flat torus ℂ^N/(ℤ^N + Ωℤ^N) with the metric induced from ℂ^N.
#[derive(Debug, Clone)]
pub struct TorusGeometry {
    /// Complex dimension.
    pub n: usize,
    /// Period matrix, N×N, symmetric with positive-definite imaginary part.
    pub omega: Vec<Vec<C64>>,
    /// Columns are the 2N real lattice generators (ℤ^N and Ωℤ^N).
    pub real_basis: Vec<Vec<f64>>,
    /// Columns generate the dual lattice (inverse transpose of `real_basis`).
    pub dual_basis: Vec<Vec<f64>>,
    pub covolume: f64,
}

impl TorusGeometry {
    pub fn new(omega: Vec<Vec<C64>>) -> Result<Self> {
        let n = omega.len();
        if n == 0 || omega.iter().any(|row| row.len() != n) {
            return Err(Error::Domain("period matrix must be square".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if (omega[i][j] - omega[j][i]).norm() > 1e-12 {
                    return Err(Error::Domain("period matrix must be symmetric".into()));
                }
                if !omega[i][j].re.is_finite() || !omega[i][j].im.is_finite() {
                    return Err(Error::Domain("period matrix must be finite".into()));
                }
            }
        }
        // positive-definite imaginary part: all leading principal minors > 0
        let im: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| omega[i][j].im).collect())
            .collect();
        for k in 1..=n {
            let minor = mat::det(&mat::submatrix(&im, k));
            if minor <= 0.0 {
                return Err(Error::Domain(format!(
                    "Im(Ω) not positive definite: leading minor {k} = {minor}"
                )));
            }
        }
        // real basis columns: (e_k, 0) and (Re Ω e_k, Im Ω e_k)
        let d = 2 * n;
        let mut basis = vec![vec![0.0; d]; d];
        for k in 0..n {
            basis[k][k] = 1.0;
            for i in 0..n {
                basis[i][n + k] = omega[i][k].re;
                basis[n + i][n + k] = omega[i][k].im;
            }
        }
        let covolume = mat::det(&basis).abs();
        let dual = mat::inverse_transpose(&basis)
            .ok_or_else(|| Error::Domain("lattice basis is singular".into()))?;
        Ok(TorusGeometry {
            n,
            omega,
            real_basis: basis,
            dual_basis: dual,
            covolume,
        })
    }

    /// The square torus ℂ/(ℤ + iℤ).
    pub fn square() -> Self {
        TorusGeometry::new(vec![vec![c64(0.0, 1.0)]]).unwrap()
    }

    /// Elliptic curve ℂ/(ℤ + τℤ).
    pub fn elliptic(tau: C64) -> Result<Self> {
        TorusGeometry::new(vec![vec![tau]])
    }

    fn column(m: &[Vec<f64>], coeffs: &[i64]) -> Vec<f64> {
        let d = m.len();
        let mut v = vec![0.0; d];
        for (j, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                for i in 0..d {
                    v[i] += m[i][j] * c as f64;
                }
            }
        }
        v
    }

    /// Dual-lattice vector for integer coefficients.
    pub fn dual_vector(&self, coeffs: &[i64]) -> Vec<f64> {
        Self::column(&self.dual_basis, coeffs)
    }

    /// Lattice vector for integer coefficients.
    pub fn lattice_vector(&self, coeffs: &[i64]) -> Vec<f64> {
        Self::column(&self.real_basis, coeffs)
    }
}

/// Mode label from which the eigenfunction is reconstructed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Torus(Vec<i64>),
    Cp1(u32),
    Toy(usize),
}

/// One eigenvalue with its evaluator data and multiplicity.
#[derive(Debug, Clone)]
pub struct SpectralDatum {
    pub lambda: f64,
    pub label: Label,
    /// Multiplicity carried by the pair evaluator (2ℓ+1 on CP¹, 1 otherwise).
    pub mult: usize,
}

#[derive(Debug, Clone)]
pub enum GeometryKind {
    Torus(TorusGeometry),
    Cp1,
    Toy { vol: f64 },
}

/// Ascending truncated spectrum; the single source of (λ_j, ψ_j).
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub kind: GeometryKind,
    pub cutoff: f64,
    pub data: Vec<SpectralDatum>,
    pub vol: f64,
}

/// ρ0 ≥ 0 with the square-root branch t_j = √(λ_j − ρ0²), taken on the upper
/// imaginary axis for λ_j < ρ0².
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RhoParameter {
    pub rho0: f64,
}

impl RhoParameter {
    pub fn new(rho0: f64) -> Result<Self> {
        if rho0 >= 0.0 && rho0.is_finite() {
            Ok(RhoParameter { rho0 })
        } else {
            Err(Error::Domain("ρ0 must be finite and ≥ 0".into()))
        }
    }

    /// t = √(λ − ρ0²) on the branch continued through the upper half-plane.
    pub fn branch_t(&self, lambda: f64) -> C64 {
        let d = lambda - self.rho0 * self.rho0;
        if d >= 0.0 {
            c64(d.sqrt(), 0.0)
        } else {
            c64(0.0, (-d).sqrt())
        }
    }
}

impl Spectrum {
    /// Explicit list of eigenvalues on a toy geometry of volume `vol`
    /// (constant-magnitude mode pairs, for closed-form tests).
    pub fn toy(lambdas: &[f64], vol: f64) -> Result<Self> {
        if vol <= 0.0 {
            return Err(Error::Domain("toy volume must be positive".into()));
        }
        let mut data: Vec<SpectralDatum> = lambdas
            .iter()
            .enumerate()
            .map(|(i, &l)| SpectralDatum {
                lambda: l,
                label: Label::Toy(i),
                mult: 1,
            })
            .collect();
        data.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
        let cutoff = data.last().map(|d| d.lambda).unwrap_or(0.0);
        Ok(Spectrum {
            kind: GeometryKind::Toy { vol },
            cutoff,
            data,
            vol,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// ψ_j(z)·conj(ψ_j(w)) summed over the multiplicity of entry `j`.
    pub fn pair_weight(&self, j: usize, z: &[f64], w: &[f64]) -> C64 {
        match &self.kind {
            GeometryKind::Torus(geom) => {
                let Label::Torus(m) = &self.data[j].label else {
                    unreachable!()
                };
                let mstar = geom.dual_vector(m);
                let mut phase = 0.0;
                for i in 0..mstar.len() {
                    phase += mstar[i] * (z[i] - w[i]);
                }
                C64::from_polar(1.0 / self.vol, 2.0 * PI * phase)
            }
            GeometryKind::Cp1 => {
                let Label::Cp1(ell) = self.data[j].label else {
                    unreachable!()
                };
                c64(theta_ell_fixed(ell, cp1_distance(z, w)), 0.0)
            }
            GeometryKind::Toy { vol } => c64(1.0 / vol, 0.0),
        }
    }

    /// Distance between points: minimum-image for tori, geodesic for CP¹.
    pub fn distance(&self, z: &[f64], w: &[f64]) -> f64 {
        match &self.kind {
            GeometryKind::Torus(geom) => min_image_distance(geom, z, w),
            GeometryKind::Cp1 => cp1_distance(z, w),
            GeometryKind::Toy { .. } => f64::INFINITY,
        }
    }

    /// #{λ_j ≤ T} with multiplicity.
    pub fn weyl_count(&self, t: f64) -> Result<usize> {
        if t > self.cutoff * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "count threshold {t} exceeds spectrum cutoff {}",
                self.cutoff
            )));
        }
        Ok(self
            .data
            .iter()
            .take_while(|d| d.lambda <= t * (1.0 + 1e-12))
            .map(|d| d.mult)
            .sum())
    }
}

/// #{λ_j ≤ T} with multiplicity (free-function form of the operation).
pub fn weyl_count(spectrum: &Spectrum, t: f64) -> Result<usize> {
    spectrum.weyl_count(t)
}

/// Geodesic distance on CP¹ between points given as (colatitude, longitude)
/// on the unit sphere; the Fubini–Study sphere has radius 1/2, so distances
/// live in [0, π/2].
pub fn cp1_distance(z: &[f64], w: &[f64]) -> f64 {
    let cosang = z[0].cos() * w[0].cos() + z[0].sin() * w[0].sin() * (z[1] - w[1]).cos();
    0.5 * cosang.clamp(-1.0, 1.0).acos()
}

fn min_image_distance(geom: &TorusGeometry, z: &[f64], w: &[f64]) -> f64 {
    let d = 2 * geom.n;
    let x: Vec<f64> = (0..d).map(|i| z[i] - w[i]).collect();
    // round to the nearest lattice point, then search a ±2 window
    let coeffs = mat::solve(&geom.real_basis, &x).unwrap_or_else(|| vec![0.0; d]);
    let base: Vec<i64> = coeffs.iter().map(|c| c.round() as i64).collect();
    let mut best = f64::INFINITY;
    let mut offset = vec![0i64; d];
    search_offsets(geom, &x, &base, &mut offset, 0, &mut best);
    best
}

fn search_offsets(
    geom: &TorusGeometry,
    x: &[f64],
    base: &[i64],
    offset: &mut Vec<i64>,
    idx: usize,
    best: &mut f64,
) {
    if idx == offset.len() {
        let coeffs: Vec<i64> = base.iter().zip(offset.iter()).map(|(b, o)| b + o).collect();
        let v = geom.lattice_vector(&coeffs);
        let dist2: f64 = x.iter().zip(&v).map(|(xi, vi)| (xi - vi).powi(2)).sum();
        *best = best.min(dist2.sqrt());
        return;
    }
    for o in -2..=2 {
        offset[idx] = o;
        search_offsets(geom, x, base, offset, idx + 1, best);
    }
}

/// Enumerate every dual-lattice eigenvalue 4π²‖m*‖² ≤ cutoff, without
/// omission, by an ellipsoid walk on the Gram matrix.
pub fn build_torus_spectrum(
    geom: &TorusGeometry,
    cutoff: f64,
    mode_cap: usize,
) -> Result<Spectrum> {
    if cutoff <= 0.0 || !cutoff.is_finite() {
        return Err(Error::Domain("cutoff must be positive".into()));
    }
    let d = 2 * geom.n;
    // Gram matrix of the dual basis and its upper Cholesky factor
    let gram = mat::gram(&geom.dual_basis);
    let chol = mat::cholesky_upper(&gram)
        .ok_or_else(|| Error::Domain("dual Gram matrix not positive definite".into()))?;
    let r2 = cutoff / (4.0 * PI * PI) * (1.0 + 1e-12) + 1e-12;

    let mut coeffs = vec![0i64; d];
    let mut found: Vec<(f64, Vec<i64>)> = Vec::new();
    enumerate_ellipsoid(&chol, r2, d, &mut coeffs, &mut found, mode_cap)?;

    let mut data: Vec<SpectralDatum> = found
        .into_iter()
        .filter_map(|(_, m)| {
            // recompute from the label so export/import reconstruction is exact
            let v = geom.dual_vector(&m);
            let n2: f64 = v.iter().map(|x| x * x).sum();
            let lambda = 4.0 * PI * PI * n2;
            if lambda <= cutoff * (1.0 + 1e-12) {
                Some(SpectralDatum {
                    lambda,
                    label: Label::Torus(m),
                    mult: 1,
                })
            } else {
                None
            }
        })
        .collect();
    data.sort_by(|a, b| {
        a.lambda
            .partial_cmp(&b.lambda)
            .unwrap()
            .then_with(|| a.label.cmp(&b.label))
    });
    Ok(Spectrum {
        kind: GeometryKind::Torus(geom.clone()),
        cutoff,
        data,
        vol: geom.covolume,
    })
}

/// Fincke–Pohst walk: fill coordinates from the last one down, keeping the
/// exact quadratic-form budget at each level.
fn enumerate_ellipsoid(
    chol: &[Vec<f64>],
    r2: f64,
    level: usize,
    coeffs: &mut Vec<i64>,
    out: &mut Vec<(f64, Vec<i64>)>,
    cap: usize,
) -> Result<()> {
    let d = chol.len();
    if level == 0 {
        // full quadratic form, exact
        let mut q = 0.0;
        for i in 0..d {
            let mut s = 0.0;
            for j in i..d {
                s += chol[i][j] * coeffs[j] as f64;
            }
            q += s * s;
        }
        if q <= r2 {
            if out.len() >= cap {
                return Err(Error::Capacity(format!(
                    "torus enumeration exceeds the configured cap of {cap} modes"
                )));
            }
            out.push((q, coeffs.clone()));
        }
        return Ok(());
    }
    let i = level - 1;
    // residual budget after the already-fixed coordinates j > i
    let mut used = 0.0;
    for k in level..d {
        let mut s = 0.0;
        for j in k..d {
            s += chol[k][j] * coeffs[j] as f64;
        }
        used += s * s;
    }
    let rem = r2 - used;
    if rem < -1e-12 {
        return Ok(());
    }
    let rem = rem.max(0.0);
    let mut c = 0.0;
    for j in level..d {
        c += chol[i][j] * coeffs[j] as f64;
    }
    let half = rem.sqrt() / chol[i][i];
    let lo = (-half - c / chol[i][i] - 1e-9).ceil() as i64;
    let hi = (half - c / chol[i][i] + 1e-9).floor() as i64;
    for m in lo..=hi {
        coeffs[i] = m;
        enumerate_ellipsoid(chol, r2, i, coeffs, out, cap)?;
    }
    coeffs[i] = 0;
    Ok(())
}

/// CP¹ spectrum λ_ℓ = 4ℓ(ℓ+1) with multiplicity 2ℓ+1 baked into the radial
/// pair profile; vol(CP¹) = π.
pub fn build_cp1_spectrum(cutoff_degree: u32) -> Spectrum {
    let data = (0..=cutoff_degree)
        .map(|ell| SpectralDatum {
            lambda: 4.0 * ell as f64 * (ell as f64 + 1.0),
            label: Label::Cp1(ell),
            mult: 2 * ell as usize + 1,
        })
        .collect();
    Spectrum {
        kind: GeometryKind::Cp1,
        cutoff: 4.0 * cutoff_degree as f64 * (cutoff_degree as f64 + 1.0),
        data,
        vol: PI,
    }
}

/// θ_ℓ(r) on CP¹: (2(2ℓ+1)/π²) ∫_r^{π/2} sin((2ℓ+1)τ)/√(cos²r − cos²τ) dτ,
/// with the endpoint singularity removed by cos τ = cos r sin φ, which turns
/// the integrand into the Chebyshev kernel U_{2ℓ}(cos r sin φ).
fn theta_ell_fixed(ell: u32, r: f64) -> f64 {
    let (nodes, weights) = quad::gauss_legendre_64();
    let c = r.cos();
    let mut sum = 0.0;
    for (&x, &w) in nodes.iter().zip(weights.iter()) {
        // map [-1,1] → [0, π/2]
        let phi = 0.25 * PI * (x + 1.0);
        sum += w * chebyshev_u(2 * ell as usize, c * phi.sin());
    }
    sum *= 0.25 * PI;
    2.0 * (2.0 * ell as f64 + 1.0) / (PI * PI) * sum
}

fn chebyshev_u(n: usize, x: f64) -> f64 {
    let mut u0 = 1.0;
    if n == 0 {
        return u0;
    }
    let mut u1 = 2.0 * x;
    for _ in 2..=n {
        let u2 = 2.0 * x * u1 - u0;
        u0 = u1;
        u1 = u2;
    }
    u1
}

/// Radial CP¹ profile with an error estimate from halving the rule order.
pub fn theta_ell_cp1(ell: u32, r: f64, _ctrl: &SeriesControl) -> Result<crate::KernelValue> {
    if !(0.0..PI / 2.0).contains(&r) {
        return Err(Error::Domain(format!("θ_ℓ needs 0 ≤ r < π/2, got {r}")));
    }
    let v = theta_ell_fixed(ell, r);
    // lower-order rule for the error estimate
    let (nodes, weights) = quad::gauss_legendre(32);
    let c = r.cos();
    let mut sum = 0.0;
    for (&x, &w) in nodes.iter().zip(weights.iter()) {
        let phi = 0.25 * PI * (x + 1.0);
        sum += w * chebyshev_u(2 * ell as usize, c * phi.sin());
    }
    let v32 = 2.0 * (2.0 * ell as f64 + 1.0) / (PI * PI) * 0.25 * PI * sum;
    Ok(crate::KernelValue::new(c64(v, 0.0), (v - v32).abs() + 1e-15 * (1.0 + v.abs())))
}

// ---------------------------------------------------------------------------
// JSON export/import: {geometry, cutoff, [{lambda, label}]}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SpectrumFile {
    geometry: GeometryFile,
    cutoff: f64,
    modes: Vec<ModeFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum GeometryFile {
    Torus { omega_re: Vec<Vec<f64>>, omega_im: Vec<Vec<f64>> },
    Cp1,
    Toy { vol: f64 },
}

#[derive(Serialize, Deserialize)]
struct ModeFile {
    lambda: f64,
    label: Label,
}

pub fn spectrum_to_json(spectrum: &Spectrum) -> String {
    let geometry = match &spectrum.kind {
        GeometryKind::Torus(g) => GeometryFile::Torus {
            omega_re: g.omega.iter().map(|r| r.iter().map(|z| z.re).collect()).collect(),
            omega_im: g.omega.iter().map(|r| r.iter().map(|z| z.im).collect()).collect(),
        },
        GeometryKind::Cp1 => GeometryFile::Cp1,
        GeometryKind::Toy { vol } => GeometryFile::Toy { vol: *vol },
    };
    let file = SpectrumFile {
        geometry,
        cutoff: spectrum.cutoff,
        modes: spectrum
            .data
            .iter()
            .map(|d| ModeFile {
                lambda: d.lambda,
                label: d.label.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("spectrum serialization")
}

/// Rebuild a spectrum from its JSON form, reconstructing evaluators from the
/// labels and validating each stored eigenvalue against its label.
pub fn spectrum_from_json(text: &str) -> Result<Spectrum> {
    let file: SpectrumFile =
        serde_json::from_str(text).map_err(|e| Error::Evaluation(format!("spectrum JSON: {e}")))?;
    let kind = match file.geometry {
        GeometryFile::Torus { omega_re, omega_im } => {
            let n = omega_re.len();
            let omega: Vec<Vec<C64>> = (0..n)
                .map(|i| (0..n).map(|j| c64(omega_re[i][j], omega_im[i][j])).collect())
                .collect();
            GeometryKind::Torus(TorusGeometry::new(omega)?)
        }
        GeometryFile::Cp1 => GeometryKind::Cp1,
        GeometryFile::Toy { vol } => GeometryKind::Toy { vol },
    };
    let vol = match &kind {
        GeometryKind::Torus(g) => g.covolume,
        GeometryKind::Cp1 => PI,
        GeometryKind::Toy { vol } => *vol,
    };
    let mut data = Vec::with_capacity(file.modes.len());
    for mode in file.modes {
        let (expect, mult) = match (&kind, &mode.label) {
            (GeometryKind::Torus(g), Label::Torus(m)) => {
                let v = g.dual_vector(m);
                let n2: f64 = v.iter().map(|x| x * x).sum();
                (4.0 * PI * PI * n2, 1)
            }
            (GeometryKind::Cp1, Label::Cp1(ell)) => {
                (4.0 * *ell as f64 * (*ell as f64 + 1.0), 2 * *ell as usize + 1)
            }
            (GeometryKind::Toy { .. }, Label::Toy(_)) => (mode.lambda, 1),
            _ => return Err(Error::Evaluation("label does not match geometry".into())),
        };
        if (mode.lambda - expect).abs() > 1e-9 * (1.0 + expect) {
            return Err(Error::Evaluation(format!(
                "stored eigenvalue {} disagrees with label reconstruction {}",
                mode.lambda, expect
            )));
        }
        data.push(SpectralDatum {
            lambda: expect,
            label: mode.label,
            mult,
        });
    }
    data.sort_by(|a, b| {
        a.lambda
            .partial_cmp(&b.lambda)
            .unwrap()
            .then_with(|| a.label.cmp(&b.label))
    });
    Ok(Spectrum {
        kind,
        cutoff: file.cutoff,
        data,
        vol,
    })
}

// ---------------------------------------------------------------------------
// small dense matrix helpers (dimensions ≤ 4 in practice)
// ---------------------------------------------------------------------------
mod mat {
    pub fn submatrix(a: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
        (0..k).map(|i| a[i][..k].to_vec()).collect()
    }

    pub fn det(a: &[Vec<f64>]) -> f64 {
        let n = a.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut d = 1.0;
        for col in 0..n {
            let (pivot, _) = m
                .iter()
                .enumerate()
                .skip(col)
                .map(|(i, row)| (i, row[col].abs()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            if m[pivot][col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                m.swap(pivot, col);
                d = -d;
            }
            d *= m[col][col];
            for i in col + 1..n {
                let f = m[i][col] / m[col][col];
                for j in col..n {
                    let v = m[col][j];
                    m[i][j] -= f * v;
                }
            }
        }
        d
    }

    /// Solve A x = b by Gaussian elimination with partial pivoting.
    pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
        let n = a.len();
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut row = a[i].clone();
                row.push(b[i]);
                row
            })
            .collect();
        for col in 0..n {
            let (pivot, mag) = m
                .iter()
                .enumerate()
                .skip(col)
                .map(|(i, row)| (i, row[col].abs()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())?;
            if mag < 1e-300 {
                return None;
            }
            m.swap(pivot, col);
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = m[i][col] / m[col][col];
                for j in col..=n {
                    let v = m[col][j];
                    m[i][j] -= f * v;
                }
            }
        }
        Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
    }

    /// Inverse transpose, column by column.
    pub fn inverse_transpose(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
        let n = a.len();
        let at: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[j][i]).collect()).collect();
        let mut inv = vec![vec![0.0; n]; n];
        for col in 0..n {
            let e: Vec<f64> = (0..n).map(|i| if i == col { 1.0 } else { 0.0 }).collect();
            let x = solve(&at, &e)?;
            for i in 0..n {
                inv[i][col] = x[i];
            }
        }
        Some(inv)
    }

    /// Gram matrix of the columns.
    pub fn gram(basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = basis.len();
        let mut g = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                g[i][j] = (0..n).map(|k| basis[k][i] * basis[k][j]).sum();
            }
        }
        g
    }

    /// Upper-triangular U with UᵀU = A (transpose of the lower Cholesky
    /// factor), so ‖Um‖² = mᵀAm.
    pub fn cholesky_upper(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
        let n = a.len();
        let mut l = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    if s <= 0.0 {
                        return None;
                    }
                    l[i][i] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        let mut u = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                u[i][j] = l[j][i];
            }
        }
        Some(u)
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn legendre_p(n: usize, x: f64) -> f64 {
        let mut p0 = 1.0;
        if n == 0 {
            return p0;
        }
        let mut p1 = x;
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    #[test]
    fn square_torus_low_eigenvalues() {
        let geom = TorusGeometry::square();
        let spec = build_torus_spectrum(&geom, 4.0 * PI * PI * 2.5, DEFAULT_MODE_CAP).unwrap();
        let lambdas: Vec<f64> = spec.data.iter().map(|d| d.lambda).collect();
        assert_eq!(lambdas.len(), 9);
        assert_eq!(lambdas[0], 0.0);
        for l in &lambdas[1..5] {
            assert_relative_eq!(*l, 4.0 * PI * PI, max_relative = 1e-13);
        }
        for l in &lambdas[5..9] {
            assert_relative_eq!(*l, 8.0 * PI * PI, max_relative = 1e-13);
        }
    }

    #[test]
    fn tiny_cutoff_keeps_constant_mode() {
        let geom = TorusGeometry::square();
        let spec = build_torus_spectrum(&geom, 1.0, DEFAULT_MODE_CAP).unwrap();
        assert_eq!(spec.len(), 1);
        assert_eq!(spec.data[0].lambda, 0.0);
    }

    #[test]
    fn completeness_under_cutoff_doubling() {
        let geom = TorusGeometry::elliptic(c64(0.3, 1.2)).unwrap();
        let t = 4.0 * PI * PI * 7.3;
        let a = build_torus_spectrum(&geom, t, DEFAULT_MODE_CAP).unwrap();
        let b = build_torus_spectrum(&geom, 2.0 * t, DEFAULT_MODE_CAP).unwrap();
        let restricted: Vec<_> = b
            .data
            .iter()
            .filter(|d| d.lambda <= t * (1.0 + 1e-12))
            .collect();
        assert_eq!(a.len(), restricted.len());
        for (x, y) in a.data.iter().zip(restricted) {
            assert_eq!(x.label, y.label);
        }
    }

    #[test]
    fn weyl_law_square_torus() {
        let geom = TorusGeometry::square();
        let t = 4.0 * PI * PI * 400.0;
        let spec = build_torus_spectrum(&geom, t, DEFAULT_MODE_CAP).unwrap();
        // brute-force lattice count at the low end
        assert_eq!(spec.weyl_count(4.0 * PI * PI).unwrap(), 5);
        assert_eq!(spec.weyl_count(1.0).unwrap(), 1);
        // (2π)^{-2N} vol(B) vol(X) T^N with N = 1: T/(4π)
        let predicted = t / (4.0 * PI);
        let count = spec.weyl_count(t).unwrap() as f64;
        assert!(
            (count / predicted - 1.0).abs() < 0.05,
            "count {count} vs Weyl {predicted}"
        );
    }

    #[test]
    fn capacity_error_fires() {
        let geom = TorusGeometry::square();
        assert!(matches!(
            build_torus_spectrum(&geom, 4.0 * PI * PI * 400.0, 100),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn series_convergence_partial_sums_bounded() {
        // Σ λ^{-N-ε} increases and stays bounded across cutoff doublings
        let geom = TorusGeometry::square();
        let eps = 0.1;
        let mut prev = 0.0;
        for scale in [100.0, 200.0, 400.0] {
            let spec =
                build_torus_spectrum(&geom, 4.0 * PI * PI * scale, DEFAULT_MODE_CAP).unwrap();
            let s: f64 = spec
                .data
                .iter()
                .filter(|d| d.lambda > 0.0)
                .map(|d| d.lambda.powf(-1.0 - eps))
                .sum();
            assert!(s >= prev);
            assert!(s < 1.0, "partial sum {s} should stay bounded");
            prev = s;
        }
    }

    #[test]
    fn torus_orthonormality_on_grid() {
        let geom = TorusGeometry::square();
        let spec = build_torus_spectrum(&geom, 4.0 * PI * PI * 6.0, DEFAULT_MODE_CAP).unwrap();
        let n = 128;
        let m = 20.min(spec.len());
        // midpoint rule over the fundamental domain is exact for these modes
        for j in 0..m {
            for k in j..m {
                let mut acc = c64(0.0, 0.0);
                for a in 0..n {
                    for b in 0..n {
                        let z = [(a as f64 + 0.5) / n as f64, (b as f64 + 0.5) / n as f64];
                        let w = [0.0, 0.0];
                        // ψ_j(z) ψ̄_k(z) = pair_j(z,0) * conj(pair_k(z,0)) * vol
                        acc += spec.pair_weight(j, &z, &w) * spec.pair_weight(k, &z, &w).conj();
                    }
                }
                acc *= spec.vol / (n * n) as f64;
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!(
                    (acc - c64(expect, 0.0)).norm() < 1e-10,
                    "⟨ψ_{j}, ψ_{k}⟩ = {acc}"
                );
            }
        }
    }

    #[test]
    fn cp1_spectrum_and_profiles() {
        let spec = build_cp1_spectrum(12);
        assert_eq!(spec.data[1].lambda, 8.0);
        assert_eq!(spec.data[0].lambda, 0.0);
        assert_eq!(spec.vol, PI);

        let ctrl = SeriesControl::default();
        // θ_0 ≡ 1/π
        let v = theta_ell_cp1(0, 0.3, &ctrl).unwrap();
        assert_relative_eq!(v.value.re, 1.0 / PI, max_relative = 1e-12);

        // zonal oracle (2ℓ+1)/π · P_ℓ(cos 2r) on the radius-1/2 sphere
        let v = theta_ell_cp1(1, 0.5, &ctrl).unwrap();
        assert_relative_eq!(v.value.re, 3.0 / PI * (1.0f64).cos(), max_relative = 1e-10);
        let v = theta_ell_cp1(2, 1e-9, &ctrl).unwrap();
        assert_relative_eq!(v.value.re, 5.0 / PI, max_relative = 1e-8);

        for ell in 0..=12u32 {
            for i in 0..8 {
                let r = 1.4 * (i as f64 + 0.3) / 8.0;
                let got = theta_ell_cp1(ell, r, &ctrl).unwrap().value.re;
                let want = (2.0 * ell as f64 + 1.0) / PI * legendre_p(ell as usize, (2.0 * r).cos());
                assert!(
                    (got - want).abs() < 1e-6,
                    "θ_{ell}({r}) = {got} vs zonal {want}"
                );
            }
        }

        assert!(matches!(
            theta_ell_cp1(3, PI / 2.0, &ctrl),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rho_branch() {
        let rho = RhoParameter::new(0.5).unwrap();
        assert_eq!(rho.branch_t(0.0), c64(0.0, 0.5));
        assert_relative_eq!(rho.branch_t(1.25).re, 1.0, max_relative = 1e-14);
        assert!(RhoParameter::new(-1.0).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let geom = TorusGeometry::elliptic(c64(0.25, 0.9)).unwrap();
        let spec = build_torus_spectrum(&geom, 4.0 * PI * PI * 5.0, DEFAULT_MODE_CAP).unwrap();
        let text = spectrum_to_json(&spec);
        let back = spectrum_from_json(&text).unwrap();
        assert_eq!(spec.len(), back.len());
        for (a, b) in spec.data.iter().zip(back.data.iter()) {
            assert_eq!(a.label, b.label);
            assert_relative_eq!(a.lambda, b.lambda, max_relative = 1e-12);
        }

        let tampered = text.replace("\"cutoff\"", "\"cutoff_\"");
        assert!(spectrum_from_json(&tampered).is_err());
    }

    #[test]
    fn min_image_distance_square() {
        let geom = TorusGeometry::square();
        let spec = build_torus_spectrum(&geom, 1.0, DEFAULT_MODE_CAP).unwrap();
        let d = spec.distance(&[0.9, 0.0], &[0.0, 0.0]);
        assert_relative_eq!(d, 0.1, max_relative = 1e-12);
        let d = spec.distance(&[0.5, 0.5], &[0.0, 0.0]);
        assert_relative_eq!(d, 0.5f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn torus_n2_enumeration_matches_brute_force() {
        let omega = vec![
            vec![c64(0.1, 1.0), c64(0.05, 0.2)],
            vec![c64(0.05, 0.2), c64(-0.2, 1.3)],
        ];
        let geom = TorusGeometry::new(omega).unwrap();
        let cutoff = 4.0 * PI * PI * 3.0;
        let spec = build_torus_spectrum(&geom, cutoff, DEFAULT_MODE_CAP).unwrap();
        // brute force over a generous box
        let mut count = 0;
        for a in -8i64..=8 {
            for b in -8i64..=8 {
                for c in -8i64..=8 {
                    for d in -8i64..=8 {
                        let v = geom.dual_vector(&[a, b, c, d]);
                        let n2: f64 = v.iter().map(|x| x * x).sum();
                        if 4.0 * PI * PI * n2 <= cutoff * (1.0 + 1e-12) {
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(spec.len(), count);
    }

    #[test]
    fn invalid_period_matrices_rejected() {
        assert!(TorusGeometry::new(vec![vec![c64(0.0, -1.0)]]).is_err());
        let asym = vec![
            vec![c64(0.0, 1.0), c64(0.3, 0.0)],
            vec![c64(0.1, 0.0), c64(0.0, 1.0)],
        ];
        assert!(TorusGeometry::new(asym).is_err());
    }
}
