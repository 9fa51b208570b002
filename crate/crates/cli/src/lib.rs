//! Presets, sweeps and artifact writing for the `dephase` binary.

use std::path::PathBuf;

pub mod config;
pub mod experiments;
pub mod oracle_suite;
pub mod output;
pub mod svg;
pub mod sweep;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{run, CurveRecord, RunOutput};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("numerical failure in curve `{curve}`: {source}")]
    Numerical {
        curve: String,
        #[source]
        source: dephasing::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for anything the user can fix in the configuration, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}

/// Core errors raised while validating input are configuration errors.
impl From<dephasing::Error> for CliError {
    fn from(e: dephasing::Error) -> Self {
        CliError::Config(e.to_string())
    }
}
