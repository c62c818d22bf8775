use modwave_core::ModwaveError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config line {line}: {message}")]
    ConfigLine { line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("unknown subcommand '{0}'")]
    UnknownCampaign(String),
    #[error(transparent)]
    Core(#[from] ModwaveError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Configuration error; `line == 0` marks a whole-file constraint.
    pub fn config(line: usize, message: impl Into<String>) -> Self {
        let message = message.into();
        if line == 0 {
            Error::Config(message)
        } else {
            Error::ConfigLine { line, message }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
