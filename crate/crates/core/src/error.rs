use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by geometry construction, meshing, assembly, solvers and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mesh conformity: {0}")]
    Conformity(String),
    #[error("mesh resolution: {0}")]
    Resolution(String),
    #[error("non-matching mortar grid: {0}")]
    Matching(String),
    #[error("mesh invariant violated: {0}")]
    MeshInvariant(String),
    #[error("assembly: {0}")]
    Assembly(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("solver contract violated: {0}")]
    Contract(String),
    #[error("preconditioner configuration: {0}")]
    Config(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
