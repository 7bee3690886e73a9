//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: non-finite samples")]
    InvalidField,
    #[error("negative density")]
    NegativeDensity,
    #[error("vacuum state: transform invalid")]
    Vacuum,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("mode index {index} out of range: model has {modes} modes")]
    ModeIndex { index: usize, modes: usize },
    #[error("path not recorded")]
    PathNotRecorded,
    #[error("mismatched trajectory time grids")]
    MismatchedTimeGrids,
    #[error("grid error: {0}")]
    Grid(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("snapshot format error: {0}")]
    Snapshot(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
