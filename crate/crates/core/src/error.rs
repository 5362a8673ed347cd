use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("operator construction failed: {0}")]
    Construction(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("configuration has {} error(s):\n  {}", .0.len(), .0.join("\n  "))]
    ConfigErrors(Vec<String>),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical instability at step {step} (s = {time}): {reason}")]
    Instability { step: u64, time: f64, reason: String },

    #[error("undefined observable: {0}")]
    Undefined(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (config or parameters)
    /// rather than by a failing run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Config(_) | Error::ConfigErrors(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
