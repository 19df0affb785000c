//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet is invalid: {0}")]
    BadAlphabet(String),

    #[error("probability table is not normalized: {0}")]
    NotNormalized(String),

    #[error("negative probability entry {value} at flat index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("alphabet mismatch between components: {0}")]
    AlphabetMismatch(String),

    #[error("erasure symbol `{symbol}` carries broadcast probability mass {mass}")]
    ErasureMass { symbol: String, mass: f64 },

    #[error("quiet symbol `{0}` is not in the relay input alphabet")]
    QuietSymbolMissing(String),

    #[error("symbol `{0}` not found in alphabet")]
    UnknownSymbol(String),

    #[error("broadcast component is not physically degraded (max deviation {0:.3e})")]
    NotDegraded(f64),

    #[error("input distribution violates the listen-mode quiet constraint: {0}")]
    QuietConstraint(String),

    #[error("sequences have mismatched lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("codebook size budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel spec file error: {0}")]
    SpecFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON parse error at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
