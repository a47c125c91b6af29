//! File formats, experiment specs, parallel drivers and verification suites
//! for [`normsim_core`].
//!
//! The `normsim` binary is a thin wrapper around this library: every
//! subcommand maps to one function here, which makes the CLI behaviour
//! testable without spawning processes.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod output;
pub mod parallel;
pub mod verify;

use normsim_core::Error as CoreError;

/// Exit status for configuration problems (bad file, unknown key, invalid
/// parameter).
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for invariant violations and runtime failures.
pub const EXIT_INVARIANT: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Model(#[from] CoreError),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Model(e) => match e {
                CoreError::NoConvergence { .. }
                | CoreError::AbsorbingMismatch { .. }
                | CoreError::Reducible { .. } => EXIT_INVARIANT,
                _ => EXIT_CONFIG,
            },
            _ => EXIT_INVARIANT,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
