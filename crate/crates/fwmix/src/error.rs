use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("elliptic integral diverges: modulus p = {0} >= 1")]
    EllipticDivergence(f64),

    #[error("elliptic Pi pole crossing: n*sin^2(gamma) = {0} >= 1")]
    PiPole(f64),

    #[error("dressed state degenerate: Omega1 = 0 with Delta2 = {0} <= 0")]
    DegenerateBranch(f64),

    #[error("invalid level index {0}: expected 2 or 3")]
    InvalidLevel(u8),

    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("regime boundary: {0}")]
    RegimeBoundary(String),

    #[error("regime mismatch: expected {expected}, coefficients classify as {found}")]
    RegimeMismatch { expected: &'static str, found: &'static str },

    #[error("pendulum integrand invalid at J = {j}: {reason}")]
    PendulumIntegrand { j: f64, reason: String },

    #[error("ODE step-size refinement failed: {0}")]
    RefinementFailure(String),

    #[error("conservation violated: {0}")]
    ConservationViolation(String),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("quadrature did not converge: error estimate {err:.3e} > tolerance {tol:.3e}")]
    QuadratureNonConvergence { err: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
