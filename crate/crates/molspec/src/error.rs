//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: &'static str, message: String },

    #[error("series truncation failed: retained weight {achieved} below 1 - {epsilon:e}")]
    Truncation { achieved: f64, epsilon: f64 },

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),

    #[error("numerical conditioning: {0}")]
    Conditioning(String),

    #[error("Hilbert layout mismatch: {0}")]
    Layout(String),

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("integrator step collapsed at t = {t}: {message}")]
    Stiffness { t: f64, message: String },

    #[error("correlation window too short: tail residual {residual:e} exceeds {limit:e}")]
    Windowing { residual: f64, limit: f64 },

    #[error("pole proximity in cavity transfer term at (n_donor={n_donor}, n_acceptor={n_acceptor}): {message}")]
    PoleProximity {
        n_donor: usize,
        n_acceptor: usize,
        message: String,
    },

    #[error("Lorentzian fit failed: {0}")]
    Fit(String),
}

impl Error {
    pub fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
