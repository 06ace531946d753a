//! Instance-file schema, per-instance pipelines, report emission, and the
//! batch runner behind the `invopt` binary.

pub mod batch;
pub mod instance;
pub mod report;
pub mod run;

use std::fmt;

/// CLI-facing error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn schema(message: impl Into<String>) -> Self {
        CliError { exit_code: 2, message: message.into() }
    }

    pub fn from_solver(err: invopt::Error) -> Self {
        use invopt::Error::*;
        let exit_code = match err {
            Schema(_) | UnsupportedForm(_) => 2,
            ObservationInfeasible { .. } | ObservationFractional { .. } => 3,
            _ => 4,
        };
        CliError { exit_code, message: err.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;
