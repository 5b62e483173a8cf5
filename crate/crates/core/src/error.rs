use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("response table: {0}")]
    Table(String),

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error(
        "surface impedance pole at {frequency_hz} Hz (|1 - S11 e^(2j beta d)| = {magnitude:e})"
    )]
    Pole { frequency_hz: f64, magnitude: f64 },

    #[error("padded FFT of {requested} points exceeds the budget of {budget} points")]
    FftBudget { requested: usize, budget: usize },

    #[error("sampling: {0}")]
    Sampling(String),

    #[error("gain cancellation residual {residual_db:e} dB exceeds {limit_db:e} dB at {frequency_hz} Hz")]
    Cancellation {
        frequency_hz: f64,
        residual_db: f64,
        limit_db: f64,
    },

    #[error("refusing to emit report: {0}")]
    EmptyReport(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &str) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}
