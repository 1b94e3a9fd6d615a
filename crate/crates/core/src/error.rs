use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Hurst index must lie strictly inside (0, 1), got {0}")]
    InvalidHurst(f64),

    #[error("gamma function has a pole at {0}")]
    GammaPole(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("kernel is singular at x = {x} (t = {t})")]
    Singular { t: f64, x: f64 },

    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error} after {subdivisions} subdivisions")]
    ToleranceNotMet {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("matrix is not positive definite within jitter {max_jitter:e}")]
    NotPositiveDefinite { max_jitter: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("at least {required} paths are needed, got {got}")]
    InsufficientPaths { required: usize, got: usize },

    #[error("invalid moving-average scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid Hurst profile: {0}")]
    InvalidProfile(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
