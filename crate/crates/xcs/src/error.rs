//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: condition has {condition} symbols, input has {input} bits")]
    LengthMismatch { condition: usize, input: usize },

    #[error("bitstring of {0} bits exceeds the supported maximum of 64")]
    TooManyBits(usize),

    #[error("invalid symbol '{symbol}' at position {position}")]
    InvalidSymbol { symbol: char, position: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("prediction array has no advocated action")]
    EmptyPredictionArray,

    #[error("non-monotone action-set stamp: t={t} is not greater than current ats={ats}")]
    NonMonotoneStamp { t: u64, ats: u64 },

    #[error("no active niches: no experienced classifier carries a stamp history")]
    NoActiveNiches,

    #[error("grid parse error at row {row}, column {col}: {message}")]
    GridParse {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("invalid grid: {0}")]
    GridInvalid(String),

    #[error("position ({row}, {col}) is not an empty cell")]
    NotEmptyCell { row: usize, col: usize },

    #[error("optimal-population oracle supports at most {max} input bits, got {got}")]
    OracleSizeBound { got: usize, max: usize },

    #[error("population dump parse error at line {line}: {message}")]
    DumpParse { line: usize, message: String },

    #[error("experiment error: {0}")]
    Experiment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
