use thiserror::Error;

pub type Result<T> = std::result::Result<T, PsiError>;

#[derive(Debug, Error)]
pub enum PsiError {
    #[error("arm index {index} out of range for {len} arms")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The instance has a zero gap where the closed-form bound needs a positive one.
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("confidence calibration: {0}")]
    Calibration(String),

    #[error("empirical state: {0}")]
    State(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("validation: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> PsiError {
    PsiError::InvalidArgument(msg.into())
}

pub(crate) fn check_index(index: usize, len: usize) -> Result<()> {
    if index < len {
        Ok(())
    } else {
        Err(PsiError::IndexOutOfRange { index, len })
    }
}
