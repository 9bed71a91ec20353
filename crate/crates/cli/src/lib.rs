//! Command implementations behind the `dde-lambert` binary.

pub mod commands;
pub mod config;

use std::fmt;
use std::io;

/// Failure classes, each with its own process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid model description.
    Config(String),
    /// Numerical failure reported by the library.
    Numeric(dde_lambert::Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(dde_lambert::Error::DegenerateRoot { .. }) => 3,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numeric(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<dde_lambert::Error> for CliError {
    fn from(e: dde_lambert::Error) -> Self {
        CliError::Numeric(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}
