use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("mode exponent {exponent} overflows the Boltzmann occupation")]
    Overflow { exponent: f64 },

    #[error("momentum mass {momentum} does not match state mass {state}")]
    MassMismatch { momentum: f64, state: f64 },

    #[error("state violates the selection criterion: zeta = {zeta:.6} >= {limit:.6}, momentum integrals diverge")]
    Inadmissible { zeta: f64, limit: f64 },

    #[error("perturbed state along {direction} violates the selection criterion (zeta = {zeta:.6})")]
    InadmissiblePerturbation { direction: String, zeta: f64 },

    #[error(
        "quadrature did not converge after {refinements} refinements (error {error:.3e}, tolerance {tolerance:.3e})"
    )]
    NotConverged {
        refinements: usize,
        error: f64,
        tolerance: f64,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("invalid quadrature specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
