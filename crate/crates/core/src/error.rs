use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the aggregation library.
///
/// Variants fall into three families that front ends map to exit codes:
/// input/data validation, computation failures, and invalid arguments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: row {row}, column `{column}`: {message}")]
    Parse { path: String, row: usize, column: String, message: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("unknown category `{category}` for task `{task}`")]
    UnknownCategory { task: String, category: String },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {actual})")]
    DimensionMismatch { what: &'static str, expected: usize, actual: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: requested {requested} values, at most {available} supported")]
    Capacity { requested: usize, available: usize },

    #[error("degenerate normalization bounds for task `{task}` (high = low = {value})")]
    DegenerateBounds { task: String, value: f64 },

    #[error("slice sampler failed: {0}")]
    SliceSampler(SliceDiagnostics),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("palette has {available} colors but {needed} are required")]
    PaletteExhausted { needed: usize, available: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the input data rather than by a computation.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Invariant(_)
                | Error::UnknownCategory { .. }
                | Error::UnknownModel(_)
                | Error::UnknownTask(_)
                | Error::DimensionMismatch { .. }
                | Error::Io(_)
        )
    }
}

/// State of a slice-sampling transition that exhausted its shrinkage budget.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceDiagnostics {
    pub x0: f64,
    pub log_level: f64,
    pub left: f64,
    pub right: f64,
    pub shrink_steps: usize,
}

impl std::fmt::Display for SliceDiagnostics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "no point accepted after {} shrinkage steps (x0 = {}, level = {}, bracket = [{}, {}])",
            self.shrink_steps, self.x0, self.log_level, self.left, self.right
        )
    }
}
