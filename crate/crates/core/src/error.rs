use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum ModwaveError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid time {t}: {reason}")]
    InvalidTime { t: f64, reason: &'static str },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("final data does not fit the grid: {0}")]
    BandLimit(String),

    #[error("oracle grid too large: {num_points} points (limit {limit})")]
    OracleGridTooLarge { num_points: usize, limit: usize },

    #[error("tail fit invalid: {0}")]
    TailFit(String),

    #[error("numerical blow-up: {0}")]
    BlowUp(String),

    #[error("conservation violated: {0}")]
    Conservation(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, ModwaveError>;
