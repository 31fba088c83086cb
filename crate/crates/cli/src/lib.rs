//! Library side of the `qdistill` command-line tool: configuration
//! parsing, CSV formatting, and the `sweep`, `peak` and `validate`
//! commands.

pub mod commands;
pub mod config;
pub mod format;

use std::fmt;

pub use commands::{peak, sweep, validate, Check, PeakReport, ValidationReport};
pub use config::{ConfigError, Experiment, ExperimentConfig, COLUMNS};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION_FAILED: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const NUMERICAL_ERROR: i32 = 3;
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG_ERROR,
            CliError::Numerical(_) => exit::NUMERICAL_ERROR,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<qdistill_core::Error> for CliError {
    fn from(e: qdistill_core::Error) -> Self {
        CliError::Numerical(format!("{e:?}: {e}"))
    }
}
