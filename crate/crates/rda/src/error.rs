use std::path::PathBuf;

use thiserror::Error;

use crate::csv_io::CsvError;
use crate::idx::IdxError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: no such file", .0.display())]
    MissingPath(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Idx {
        path: PathBuf,
        #[source]
        source: IdxError,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: CsvError,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] rda_core::Error),
    #[error("replay differs from the recorded report: {0}")]
    ReplayMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingPath(path)
        } else {
            Error::Io { path, source }
        }
    }

    /// 2 for problems with the invocation or its inputs, 1 for failures
    /// while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::MissingPath(_)
            | Error::Idx { .. }
            | Error::Csv { .. }
            | Error::Json { .. }
            | Error::Config(_) => 2,
            Error::Core(e) => match e {
                rda_core::Error::Config(_)
                | rda_core::Error::InvalidDataset(_)
                | rda_core::Error::Contract(_)
                | rda_core::Error::DimensionMismatch { .. } => 2,
                rda_core::Error::NotSpd(_) | rda_core::Error::RetractionFailed(_) | rda_core::Error::NonFinite(_) => 1,
            },
            Error::Io { .. } | Error::ReplayMismatch(_) => 1,
        }
    }
}
