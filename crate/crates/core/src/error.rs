use thiserror::Error;

use crate::complex::Simplex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("simplex {0:?} is not a member of the complex")]
    NotMember(Simplex),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("size bound exceeded: {what} ({actual} > {bound})")]
    SizeBound {
        what: &'static str,
        actual: usize,
        bound: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn is_size_bound(&self) -> bool {
        matches!(self, Error::SizeBound { .. })
    }
}
