use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] catalysis::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// What gets printed to stderr on failure.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => match e {
                catalysis::Error::DimensionLimit { .. } => EXIT_RESOURCE,
                catalysis::Error::Argument(_)
                | catalysis::Error::Precondition(_)
                | catalysis::Error::Infeasible(_)
                | catalysis::Error::GibbsBoundary { .. } => EXIT_USAGE,
                catalysis::Error::InvalidState(_) | catalysis::Error::Numeric(_) => EXIT_FAILURE,
            },
            CliError::Io(_) | CliError::Json(_) => EXIT_FAILURE,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        let error = match self {
            CliError::Usage(_) => "usage",
            CliError::Core(catalysis::Error::DimensionLimit { .. }) => "dimension_limit",
            CliError::Core(_) if self.exit_code() == EXIT_USAGE => "invalid_input",
            CliError::Core(_) => "numeric",
            CliError::Io(_) | CliError::Json(_) => "io",
        };
        ErrorRecord { error, message: self.to_string(), exit_code: self.exit_code() }
    }
}
