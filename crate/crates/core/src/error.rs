use thiserror::Error;

/// Errors raised by the AHP engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AhpError {
    #[error("matrix must be square with dimension >= {min}, got {rows}x{cols}")]
    Shape {
        rows: usize,
        cols: usize,
        min: usize,
    },

    #[error("non-positive judgment {value} at ({row}, {col})")]
    NonPositive { row: usize, col: usize, value: f64 },

    #[error("diagonal entry ({index}, {index}) is {value}, expected 1")]
    Diagonal { index: usize, value: f64 },

    #[error("judgment at ({row}, {col}) has a non-finite logarithm; magnitude is degenerate")]
    DegenerateMagnitude { row: usize, col: usize },

    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    DimensionMismatch {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("power iteration did not converge after {iterations} iterations (last estimate {last_lambda})")]
    NoConvergence { iterations: usize, last_lambda: f64 },

    #[error("{0}")]
    InvalidInput(String),

    #[error("random index must be positive to form a consistency ratio, got {0}")]
    UndefinedRatio(f64),

    #[error("geometric mean undefined: component {index} of expert {expert} is {value}")]
    NonPositiveWeight {
        expert: usize,
        index: usize,
        value: f64,
    },

    #[error("validation failed:\n{0}")]
    Validation(crate::diagnostics::Diagnostics),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for AhpError {
    fn from(e: std::io::Error) -> Self {
        AhpError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for AhpError {
    fn from(e: serde_json::Error) -> Self {
        AhpError::Parse(e.to_string())
    }
}

pub type Result<T, E = AhpError> = std::result::Result<T, E>;
