use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad command line or configuration; exit status 2.
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] frameflow_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Core(frameflow_core::Error::Capability(_)) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
