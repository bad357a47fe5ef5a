//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("level {level} is degenerate at {point:?}: gap {gap:e} <= {tol:e}")]
    DegenerateLevel {
        level: usize,
        point: Vec<f64>,
        gap: f64,
        tol: f64,
    },

    #[error("Hamiltonian is not Hermitian: max |H - H^dagger| = {deviation:e} exceeds {tol:e}")]
    NonHermitian { deviation: f64, tol: f64 },

    #[error("frames too far apart for phase alignment: |<n_ref|n>| = {overlap}")]
    FrameMismatch { overlap: f64 },

    #[error("finite-difference step {step:e} below 1e-12")]
    StepUnderflow { step: f64 },

    #[error("parameter point outside model domain: {0}")]
    DomainError(String),

    #[error(
        "quantum geometric tensor is singular: condition number {cond:e} exceeds {cond_max:e}"
    )]
    SingularQgt { cond: f64, cond_max: f64 },

    #[error("stencil evaluation failed: {0}")]
    StencilFailure(String),

    #[error("integrator failed: {0}")]
    StepFailure(String),

    #[error("vector not orthogonal to tracked state: |<n|w>| = {overlap:e}")]
    NotOrthogonal { overlap: f64 },

    #[error("order fit rejected: r2 = {r2:.4} < 0.98 (slope {slope:.3})")]
    FitRejected { r2: f64, slope: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// True for failures caused by the numerics rather than the input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::Config(_) | Error::Dimension(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
