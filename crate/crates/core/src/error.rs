use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid assortment: {0}")]
    InvalidAssortment(String),

    #[error("assortment of size {size} exceeds capacity {capacity}")]
    CapacityViolation { size: usize, capacity: usize },

    #[error("exhaustive enumeration refused: {n_items} items exceeds the guard of {limit}")]
    TooLarge { n_items: usize, limit: usize },

    #[error("domain error: {0}")]
    Domain(String),

    /// The lower-bound theorem is only stated for `K ≤ N/4`.
    #[error("theorem not applicable: capacity {capacity} > n_items/4 with n_items = {n_items} (requires K <= N/4)")]
    NotApplicable { n_items: usize, capacity: usize },

    #[error("policy protocol violation: {0}")]
    Protocol(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
