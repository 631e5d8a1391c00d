//! Spectral kernels on concrete compact geometries.
//!
//! The crate builds, from a truncated Laplace spectrum on a flat complex torus
//! or on CP¹, the chain
//!
//! ```text
//! heat kernel → translated Poisson kernel → wave distribution
//!            → K(z,w;s) → resolvent series G and Eisenstein-type series E
//!            → Kronecker limit data against a theta norm
//! ```
//!
//! All series and quadrature evaluations return a [`KernelValue`] carrying an
//! a-posteriori error estimate, and every operation is pure, so values are
//! deterministic for a fixed [`SeriesControl`].
//!
//! Conventions fixed project-wide: the Laplacian is the real Riemannian one
//! with non-negative spectrum (torus eigenvalues `4π²‖m*‖²`), and `t_j =
//! √(λ_j − ρ0²)` takes the upper imaginary branch `i√(ρ0² − λ_j)` for small
//! eigenvalues.

pub mod accel;
pub mod eisenstein;
pub mod error;
pub mod kernels;
pub mod kronecker;
pub mod kseries;
pub mod numeric;
pub mod quad;
pub mod report;
pub mod resolvent;
pub mod specfun;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};
pub use numeric::{KernelValue, SeriesControl};
pub use spectra::{RhoParameter, Spectrum, TorusGeometry};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
