//! Scenario runner for the `gaugecode` binary: configuration, verification
//! suites, error-injection experiments and report writing.

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] gaugecode::Error),
}

impl CliError {
    /// Process exit status; every error path exits with 2.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub use commands::{execute_config, run, Cli, Command};
pub use config::{Config, Overrides};
pub use report::{Check, Report, SCHEMA_VERSION};
pub use suites::Suite;
