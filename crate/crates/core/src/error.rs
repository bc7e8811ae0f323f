use thiserror::Error;

/// Errors produced by parameter validation, solvers, and the experiment
/// runner. `exit_code` maps these onto the CLI exit-code contract
/// (2 = validation, 3 = solver failure).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("time grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("time step too large: {0}")]
    StepSize(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("solver instability: {0}")]
    Instability(String),

    #[error("singular spectral response: {0}")]
    SingularResponse(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("empty window: {0}")]
    EmptyWindow(String),

    #[error("invalid experiment spec: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    /// CLI exit code for this error: 2 for validation problems, 3 for
    /// runtime solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::GridTooCoarse(_)
            | Error::StepSize(_)
            | Error::GridMismatch(_)
            | Error::Unsupported(_)
            | Error::EmptyWindow(_)
            | Error::Validation(_) => 2,
            Error::Instability(_) | Error::SingularResponse(_) | Error::Io(_) => 3,
        }
    }
}
