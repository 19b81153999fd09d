use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("cannot build {folds} stratified folds with only {minority} minority samples")]
    InfeasibleStratification { folds: usize, minority: usize },

    #[error("infeasible synthesis: {0}")]
    InfeasibleSynthesis(String),

    #[error("zero baseline certainty at sample {index}")]
    DivisionGuard { index: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("dimension mismatch: expected {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
