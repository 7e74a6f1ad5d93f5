use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure classification, used by front-ends to map errors onto
/// process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed, inconsistent, or missing input data.
    Data,
    /// A numerical procedure could not produce a usable result.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("duplicate row for well `{well}` at day {day}")]
    DuplicateRow { well: String, day: i64 },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-finite {what} at row {row}")]
    NonFinite { what: &'static str, row: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("malformed model document: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("degenerate weights: all observation weights are zero")]
    DegenerateWeights,

    #[error("design matrix is degenerate: every column was dropped as linearly dependent")]
    DegenerateDesign,

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("negative response value {value} at row {row}")]
    NegativeResponse { row: usize, value: f64 },

    #[error("fit diverged: linear predictor exceeded the overflow guard at row {row}")]
    Divergence { row: usize },

    #[error("response is constant: variance is undefined")]
    ConstantResponse,

    #[error("degenerate residual distribution: {0}")]
    DegenerateResiduals(String),

    #[error("covariance is singular even after ridge regularization (column {column})")]
    SingularCovariance { column: usize },

    #[error("simulated rate overflow at row {row}: choose smaller coefficients")]
    SimulationOverflow { row: usize },
}

impl Error {
    /// Classify this error for exit-code mapping.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::MissingColumn(_)
            | Error::DuplicateRow { .. }
            | Error::EmptyDataset(_)
            | Error::ShapeMismatch { .. }
            | Error::Parse { .. }
            | Error::NonFinite { .. }
            | Error::InvalidSpec(_)
            | Error::ModelFormat(_)
            | Error::NegativeResponse { .. }
            | Error::Io(_) => ErrorClass::Data,
            Error::DegenerateWeights
            | Error::DegenerateDesign
            | Error::NotPositiveDefinite { .. }
            | Error::Divergence { .. }
            | Error::ConstantResponse
            | Error::DegenerateResiduals(_)
            | Error::SingularCovariance { .. }
            | Error::SimulationOverflow { .. } => ErrorClass::Numeric,
        }
    }
}
