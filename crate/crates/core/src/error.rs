use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),

    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("no occupation survived the missing-data filter")]
    EmptyCorpus,

    #[error("attribute `{0}` has zero variance")]
    DegenerateColumn(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("matrix is singular or not positive definite: {0}")]
    Singular(String),

    #[error("KMO is undefined: all off-diagonal correlations are zero")]
    UndefinedKmo,

    #[error("silhouette is undefined for fewer than two non-empty clusters")]
    UndefinedSilhouette,

    #[error("{routine} did not converge after {iterations} iterations (last delta {delta:e})")]
    Convergence {
        routine: &'static str,
        iterations: usize,
        delta: f64,
    },

    #[error("empty group `{group}`; unmatched codes: {unmatched:?}")]
    EmptyGroup {
        group: String,
        unmatched: Vec<String>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numeric,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Singular(_)
            | Error::UndefinedKmo
            | Error::UndefinedSilhouette
            | Error::Convergence { .. } => ErrorKind::Numeric,
            Error::Stage { source, .. } => source.kind(),
            _ => ErrorKind::Validation,
        }
    }
}
