//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by configuration validation, state construction and the
/// propagators. Numerical diagnostics are reported in `f64` regardless of the
/// scalar type of the computation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("truncation too small: retained weight {retained} violates 1 - leak_tol = {required}")]
    Truncation { retained: f64, required: f64 },

    #[error("state integrity: squared norm {norm_sq} outside 1 +/- {tol}")]
    NormIntegrity { norm_sq: f64, tol: f64 },

    #[error("integration failure in sector N={sector}: {detail}")]
    SectorIntegration { sector: usize, detail: String },

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("adaptive basis too small in {mode} mode: leakage {leakage:.3e} at scaled time {tau:.4} (limit {limit:.1e})")]
    BasisTooSmall {
        mode: &'static str,
        leakage: f64,
        tau: f64,
        limit: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Attach a sector label to an integration failure bubbling out of a
    /// per-sector propagator.
    pub fn in_sector(self, sector: usize) -> Self {
        match self {
            Error::Integration(detail) => Error::SectorIntegration { sector, detail },
            other => other,
        }
    }
}
