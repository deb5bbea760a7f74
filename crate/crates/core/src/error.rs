use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The argument lies on (or within tolerance of) the real segment `[-1, 1]`.
    #[error("value {re}{im:+}i lies on the band [-1, 1]")]
    Band { re: f64, im: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid wreath recursion: {0}")]
    Validation(String),

    #[error("level {level} exceeds the maximum level {max}")]
    LevelTooLarge { level: usize, max: usize },

    #[error("blocks do not commute: |AC - CA| = {residual:e}")]
    Commutation { residual: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite coordinate in point")]
    NonFinite,

    #[error("undefined on the extended indeterminacy set")]
    UndefinedOnE,

    #[error("invalid plane: {0}")]
    Plane(String),
}
