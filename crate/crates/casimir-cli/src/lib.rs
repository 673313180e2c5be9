//! Library side of the `casimir` command line tool: config parsing,
//! validation, run orchestration and artifact writing.

pub mod config;
pub mod runner;

use casimir_core::CoreError;

/// CLI error classes, mapped onto process exit codes:
/// 0 success, 2 configuration, 3 numerical, 4 I/O.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error:\n{}", .0.join("\n"))]
    Config(Vec<String>),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    /// Reclassify solver errors raised while building the scenario as
    /// configuration errors (the inputs described an invalid scene).
    pub fn into_config_phase(self) -> Self {
        match self {
            CliError::Core(e) => CliError::Config(vec![e.to_string()]),
            other => other,
        }
    }

    /// Machine-readable error kind for the run manifest.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Core(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }
}
