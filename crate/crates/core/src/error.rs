//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
    #[error("duplicate parameter name: {0}")]
    DuplicateParameter(String),
    #[error("unknown parameter: {0}")]
    UnknownParameter(String),
    #[error("token id {id} out of range for vocabulary of size {vocab}")]
    TokenOutOfRange { id: u32, vocab: usize },
    #[error("data error: {0}")]
    Data(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
