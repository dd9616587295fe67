//! Configuration, orchestration and acceptance checks behind the `qfd`
//! binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod output;

use std::fmt;

pub use config::RunConfig;

/// Everything a command can fail with, mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(qfd_core::Error),
    Io(String),
    /// `verify` ran but some criteria failed.
    Acceptance { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) | CliError::Acceptance { .. } => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Numerical(e) => e.name(),
            CliError::Io(_) => "IoError",
            CliError::Acceptance { .. } => "AcceptanceFailed",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) => f.write_str(m),
            CliError::Numerical(e) => write!(f, "{e}"),
            CliError::Acceptance { failed } => write!(f, "{failed} acceptance criteria failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qfd_core::Error> for CliError {
    fn from(e: qfd_core::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
