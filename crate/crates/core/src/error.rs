use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    /// Desk-scale guard tripped (problem too large for the dense oracle).
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    /// The sampled LP of an estimation phase could not be solved.
    /// `phase1_objective` is the residual infeasibility left by phase 1.
    #[error("estimation failed: {reason} (phase-1 objective {phase1_objective:.3e})")]
    EstimationFailure { reason: String, phase1_objective: f64 },

    #[error("generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ResourceLimit(_) => 3,
            Error::InvalidArgument(_)
            | Error::UnsupportedShape(_)
            | Error::Json(_)
            | Error::Generation(_) => 2,
            _ => 1,
        }
    }
}
