use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HillError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("no Fourier coefficient above the floor {floor:e}")]
    EmptyFit { floor: f64 },
    #[error("decay envelope not usable for a certificate: b = {b} must exceed ln 2")]
    InvalidEnvelope { b: f64 },
    #[error("structure error: {0}")]
    Structure(String),
    #[error("step size underflow at t = {t}: h = {h:e}")]
    Stiffness { t: f64, h: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("series file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, HillError>;
