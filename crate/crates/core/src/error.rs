use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("horizon mismatch: seller built for T={seller}, game configured for T={game}")]
    HorizonMismatch { seller: usize, game: usize },

    #[error("transcript has {actual} rounds, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{what} refused: {requested} exceeds the limit of {limit}")]
    TooLarge {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("exact best response is intractable: more than {cap} (state, round) entries; use the grid buyer instead")]
    Intractable { cap: usize },

    #[error("seller machine has no canonical state encoding")]
    NoStateKey,

    #[error("empty input: {0}")]
    Empty(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
