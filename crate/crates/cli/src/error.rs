use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Config {
        path: PathBuf,
        source: toml::de::Error,
    },

    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] cim_core::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// The run completed but some rows or solves did not converge.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use cim_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 1,
            CliError::Read { .. } | CliError::Io(_) => 3,
            CliError::Numerical(_) => 2,
            CliError::Core(e) => match e {
                E::InvalidInput(_) | E::Parse { .. } | E::Invariant(_) | E::Dimension { .. } => 1,
                E::NonFinite { .. } | E::Domain(_) | E::Singular(_) => 2,
                E::Io(_) => 3,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
