use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid graph: {0}")]
    Validation(String),

    #[error("node {0} has zero degree and cannot start a random walk")]
    DegenerateNode(usize),

    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("node {src} cannot reach {dst}: hitting time is infinite")]
    Unreachable { src: usize, dst: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("graph has {n} nodes, above the dense limit of {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("invalid parameters: {0}")]
    Spec(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
