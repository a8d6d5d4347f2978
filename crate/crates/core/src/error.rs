use std::path::PathBuf;

use crate::{dataset::DatasetError, metrics::MetricsError, model::ModelError, nn::NnError, wfdb::WfdbError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-level error. Each module has its own error enum; this wraps them so
/// the pipeline and the CLI can propagate with `?`.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Wfdb(#[from] WfdbError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: WfdbError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("record {record}: checksum mismatch on signal(s) {signals:?}")]
    ChecksumMismatch { record: String, signals: Vec<usize> },
    #[error("digest mismatch for {path}: expected {expected}, got {actual}")]
    DigestMismatch {
        path: PathBuf,
        expected: String,
        actual: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }
}
