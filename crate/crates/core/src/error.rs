use std::path::PathBuf;

use crate::network::{NodeId, RouteId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown route id {0}")]
    UnknownRoute(RouteId),

    #[error("stop {to} is unreachable from stop {from} on the road graph")]
    Unreachable { from: NodeId, to: NodeId },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("design matrix is rank deficient ({rank} of {columns} columns independent); normalize the objectives or rate more networks")]
    RankDeficient { rank: usize, columns: usize },

    #[error("infeasible optimization: {0}")]
    Infeasible(String),

    #[error("missing artifact {file}: run stage `{stage}` first")]
    MissingArtifact { file: String, stage: &'static str },

    #[error("artifact {file} was produced by manifest {found}, expected {expected}")]
    LineageMismatch {
        file: String,
        expected: String,
        found: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// Process exit status categories used by the command line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config = 2,
    Data = 3,
    Infeasible = 4,
}

impl Error {
    pub fn exit_kind(&self) -> ExitKind {
        match self {
            Error::Config(_) | Error::MissingArtifact { .. } | Error::LineageMismatch { .. } => {
                ExitKind::Config
            }
            Error::Infeasible(_) | Error::RankDeficient { .. } => ExitKind::Infeasible,
            _ => ExitKind::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
