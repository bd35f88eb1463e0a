use thiserror::Error;

/// Errors produced by panel construction, estimators and the evaluation
/// harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data or configuration violates a precondition.
    #[error("validation: {0}")]
    Validation(String),

    /// A numerical routine failed (singular system, no signal, ...).
    #[error("computation: {0}")]
    Computation(String),

    /// An iterative solver hit its iteration cap before meeting tolerance.
    #[error("no convergence in {context}: last objective {last_objective:e}")]
    NonConvergence { context: String, last_objective: f64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn computation(msg: impl Into<String>) -> Self {
        Error::Computation(msg.into())
    }
}
