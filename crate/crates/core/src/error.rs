use thiserror::Error;

/// Errors produced by the simulation and verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KarlinError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("count overflow: {0}")]
    Overflow(String),

    #[error("matrix is not positive semi-definite (jitter cap {jitter_cap:e} exceeded, min eigenvalue {min_eig:e})")]
    NotPsd { jitter_cap: f64, min_eig: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("normalization sigma_n is zero for n = {0} (n < 1/p_1)")]
    ZeroSigma(f64),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for KarlinError {
    fn from(e: std::io::Error) -> Self {
        KarlinError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, KarlinError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(KarlinError::Domain(msg.into()))
}
