use thiserror::Error;

/// Errors raised by the numerical modules and the command-line runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid damping profile: {0}")]
    Damping(String),

    #[error("size mismatch: expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("singular system (smallest singular value {sigma_min:.3e})")]
    Singular { sigma_min: f64 },

    #[error("power iteration did not converge after {iterations} iterations (last ratio {last_ratio:.9})")]
    NoConvergence { iterations: usize, last_ratio: f64 },

    #[error("wrong regime: {0}")]
    Regime(String),

    #[error("time step {dt:.6e} violates the stability limit {limit:.6e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("non-finite state detected at t = {t:.6} (step {step})")]
    NonFinite { t: f64, step: usize },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("{failed} of {total} sweep entries failed: {detail}")]
    SweepEntries { failed: usize, total: usize, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
