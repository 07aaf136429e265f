//! Command-line experiments for the quantum private query simulator.
//!
//! This crate carries everything that needs `std`: argument and config-file
//! parsing, multi-threaded trial loops, and the CSV / line-delimited JSON
//! artifacts. The physics lives in [`qpq_core`].

pub mod artifacts;
pub mod cli;
pub mod config;
pub mod parallel;

use std::io;
use std::path::PathBuf;

pub use cli::{run, run_cli, run_with};

/// Failure of a CLI invocation; each variant maps to its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(qpq_core::QpqError),
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    /// Argument-parser outcome, including `--help` and `--version`.
    #[error(transparent)]
    Usage(#[from] clap::Error),
}

impl From<qpq_core::QpqError> for CliError {
    fn from(e: qpq_core::QpqError) -> Self {
        match e {
            qpq_core::QpqError::Parse(msg) => CliError::Config(format!("cannot parse {msg}")),
            other => CliError::Domain(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Domain(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Usage(e) if !e.use_stderr() => 0,
            CliError::Usage(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}
