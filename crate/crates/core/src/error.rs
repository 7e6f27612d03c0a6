use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid basis spec: {0}")]
    InvalidSpec(String),

    #[error("invalid domain [{a}, {b}]: lower bound must be below upper bound")]
    InvalidDomain { a: f64, b: f64 },

    #[error("point {t} lies outside the domain [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },

    #[error("basis index {index} out of range (num_basis = {num_basis})")]
    IndexOutOfRange { index: usize, num_basis: usize },

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("label error: {0}")]
    Label(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("operation requires a {expected} model, got {found}")]
    Variant {
        expected: &'static str,
        found: &'static str,
    },

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("member B{degree}: {source}")]
    Member {
        degree: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("model archive error: {0}")]
    Archive(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_row(self, row: usize) -> Self {
        Error::Row {
            row,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_member(self, degree: usize) -> Self {
        Error::Member {
            degree,
            source: Box::new(self),
        }
    }

    /// True for failures caused by the caller's inputs (data files, configs,
    /// parameters) rather than by a bug or environment fault.
    pub fn is_user_error(&self) -> bool {
        match self {
            Error::Internal(_) => false,
            Error::Row { source, .. } | Error::Member { source, .. } => source.is_user_error(),
            _ => true,
        }
    }
}
