use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("event log is empty")]
    EmptyLog,

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("inverted time window: {from} > {to}")]
    InvertedWindow { from: String, to: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at {locator}: {message}")]
    Parse { locator: String, message: String },

    #[error("malformed XML: {0}")]
    Xml(String),

    #[error("symbol {symbol} outside alphabet of size {size}")]
    SymbolOutOfAlphabet { symbol: usize, size: usize },

    #[error("every cluster assigns zero probability to case {0}")]
    DegenerateAssignment(String),

    #[error("posterior threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),

    #[error("case sets differ: {0}")]
    CaseSetMismatch(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
