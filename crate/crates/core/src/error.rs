use thiserror::Error;

/// Errors produced by the rankscope toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("tolerance {epsilon} lies within the guard band of singular value ratio {ratio}")]
    DegenerateTolerance { epsilon: f64, ratio: f64 },

    #[error("exact rank oracle limited to min(rows, cols) <= {limit}, got {size}")]
    Scale { size: usize, limit: usize },

    #[error("at least two samples are required, got {0}")]
    SampleCount(usize),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("rate {0} is not contracting (must lie in (0, 1))")]
    NonContracting(f64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by degenerate numerical situations rather than malformed input.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateTolerance { .. } | Error::DegenerateInput(_) | Error::NonContracting(_)
        )
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
