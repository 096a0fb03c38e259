use taskagg_core::Error;
use thiserror::Error as ThisError;

/// Exit codes of the `taskagg` binary.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const COMPUTATION: i32 = 3;
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("data: {0}")]
    Data(String),

    #[error("computation: {0}")]
    Computation(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Data(_) | CliError::Io { .. } => exit::DATA,
            CliError::Computation(_) => exit::COMPUTATION,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::InvalidWeights(_) => CliError::Usage(e.to_string()),
            e if e.is_data_error() => CliError::Data(e.to_string()),
            e => CliError::Computation(e.to_string()),
        }
    }
}
