//! Error types shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("pole: {0}")]
    Pole(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("divergent: {0}")]
    Divergence(String),
    #[error("series/quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("method not applicable: {0}")]
    MethodMismatch(String),
    #[error("square-root branch crossed unexpectedly: {0}")]
    Branch(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("evaluation too close to a pole: {0}")]
    PoleProximity(String),
    #[error("spectral denominator vanishes: {0}")]
    SpectralPole(String),
    #[error("coincident points: {0}")]
    Coincidence(String),
    #[error("Laurent fit unstable: {0}")]
    FitUnstable(String),
    #[error("test function fails admissibility: {0}")]
    Admissibility(String),
    #[error("point lies on the divisor: {0}")]
    DivisorHit(String),
    #[error("grid point too close to the divisor point: {0}")]
    GridTooClose(String),
    #[error("evaluation error: {0}")]
    Evaluation(String),
}
