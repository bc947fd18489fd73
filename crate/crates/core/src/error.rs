use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or invalid map/family document. `line` is 1-based.
    #[error("line {line}: {message}")]
    Spec { line: usize, message: String },

    #[error("invalid input `{field}`: {message}")]
    InvalidInput { field: String, message: String },

    #[error("parameter {param} is excluded: {reason}")]
    ExcludedParameter { param: String, reason: String },

    /// A configured size cap would be exceeded; the computation is refused.
    #[error("refused: {0}")]
    CapExceeded(String),

    /// A threshold verdict was requested with `eps` not above the error bound.
    #[error("verdict threshold eps={eps:e} does not exceed the error bound {error:e}")]
    MeaninglessVerdict { eps: f64, error: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapExceeded(_) => 3,
            _ => 2,
        }
    }
}
