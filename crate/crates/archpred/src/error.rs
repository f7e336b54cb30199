use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] archpred_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: duplicate arch_id `{arch_id}` at line {line} (first seen at line {first})", path.display())]
    Duplicate {
        path: PathBuf,
        arch_id: String,
        line: usize,
        first: usize,
    },

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("checkpoint {}: {message}", path.display())]
    Checkpoint { path: PathBuf, message: String },

    #[error("checkpoint does not fit dataset: {0}")]
    Incompatible(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("worker thread panicked")]
    Worker,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        Self::Config(vec![message.into()])
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
