use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HpwlError>;

#[derive(Debug, Error)]
pub enum HpwlError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("load error at row {row}, column {column}: {message}")]
    Load {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("hypergraph construction failed: {0}")]
    Construction(String),

    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    #[error("system matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("solver diverged at outer iteration {iteration}: {detail}")]
    Divergence { iteration: usize, detail: String },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("output error: {0}")]
    Output(String),
}

impl HpwlError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HpwlError::Io {
            path: path.into(),
            source,
        }
    }
}
