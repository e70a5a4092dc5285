//! Experiment runner for the kicked-top fidelity study: configuration,
//! result files and run records.

pub mod config;
pub mod emit;
pub mod record;
pub mod run;
pub mod svg;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ExperimentKind, Format, RawParams, Target};
pub use record::RunRecord;
pub use run::run;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qtop::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// 1 usage or config, 2 numerical or runtime, 3 edge not found.
    pub fn exit_code(&self) -> i32 {
        use qtop::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Core(E::EdgeNotFound(_)) => 3,
            CliError::Core(E::InvalidSpin(_) | E::UnsupportedSpin(_) | E::InvalidPoint(_) | E::InvalidInput(_)) => 1,
            CliError::Core(_) | CliError::Io { .. } => 2,
        }
    }
}
