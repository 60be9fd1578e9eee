//! Error type shared across the crate.

use num_complex::Complex64;
use thiserror::Error;

/// Everything that can go wrong while building systems or running checks.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exponential overflow evaluating measure at p = {p} (|Re p|*tau = {exponent:.3e} exceeds double range)")]
    Overflow { p: Complex64, exponent: f64 },

    #[error("matrix numerically singular at p = {p} (reciprocal condition estimate {rcond:.3e})")]
    SingularAtP { p: Complex64, rcond: f64 },

    #[error("characteristic root detected on the line Re p = {line} (min |Delta| = {min_modulus:.3e}, threshold {threshold:.3e}); nudge nu and retry")]
    RootOnLine {
        line: f64,
        min_modulus: f64,
        threshold: f64,
    },

    #[error("contour integral did not settle on an integer winding number (residual {residual:.3e})")]
    NonIntegerWinding { residual: f64 },

    #[error("no admissible frequency cap below {limit:.3e} gives a negative tail bound")]
    TailUnbounded { limit: f64 },

    #[error("frequency cap {omega:.6e} too small; minimal admissible cap is {minimal:.6e}")]
    OmegaTooSmall { omega: f64, minimal: f64 },

    #[error("state became non-finite at t = {t:.6e}")]
    NonFiniteState { t: f64 },

    #[error("trajectory pair already merged before the fit window (difference {diff:.3e} at t = {t:.6e})")]
    DifferenceUnderflow { t: f64, diff: f64 },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
