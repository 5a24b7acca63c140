use thiserror::Error;

/// Errors surfaced by the simulation library.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid chain specification: {0}")]
    InvalidChain(String),

    #[error("invalid bath specification: {0}")]
    InvalidBath(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("hierarchy dimension {dim} exceeds the configured budget of {budget}")]
    ResourceBudget { dim: usize, budget: usize },

    #[error("numerical backend failure: {0}")]
    Linalg(String),

    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl From<ndarray_linalg::error::LinalgError> for CoreError {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        CoreError::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
