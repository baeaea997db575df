use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An enumeration or exact-integer computation would exceed a configured limit.
    /// `count` saturates at `u128::MAX`.
    #[error("{what}: {count} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, count: u128, cap: u128 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("expressions belong to different variable registries")]
    Registry,

    #[error("{method} requires a {expected}-fold summation, got q = {got}")]
    WrongFold {
        method: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
