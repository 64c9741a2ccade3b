use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("invalid value for config key `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("config line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] rfsched::Error),
}

impl CliError {
    pub fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for solver failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(
                rfsched::Error::Solver { .. } | rfsched::Error::Replication { .. } | rfsched::Error::Planner { .. },
            ) => 2,
            _ => 1,
        }
    }
}
