//! Command-line front end for `dipolekit`.
//!
//! Exit codes: 0 success, 1 check tolerance failure, 2 configuration or
//! validation error, 3 numerical convergence failure.

pub mod commands;
pub mod config;
pub mod output;

use dipolekit::Error;

pub const EXIT_CHECK: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_CONVERGENCE: u8 = 3;

/// A failure with its exit code and a one-line diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } => EXIT_CONVERGENCE,
            _ => EXIT_CONFIG,
        };
        let message = match e {
            // the full sequence is too long for a one-line diagnostic
            Error::NotConverged {
                what,
                residual,
                tol,
                sequence,
            } => format!(
                "{what} did not converge: residual {residual:e} > tolerance {tol:e} after {} terms",
                sequence.len()
            ),
            other => other.to_string(),
        };
        CliError { code, message }
    }
}

pub fn run(cli: &config::Cli) -> Result<u8, CliError> {
    let cfg = config::RunConfig::resolve(cli)?;
    commands::dispatch(&cfg)
}
