use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {message}", path.display())]
    Schema { path: PathBuf, message: String },
    #[error("{}: timestamp on line {line} does not increase", path.display())]
    NonMonotonicTimestamps { path: PathBuf, line: u64 },
    #[error("no houses selected")]
    EmptyCohort,
    #[error("every house failed; nothing to report")]
    NoResults,
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{}: {source}", path.display())]
    Data {
        path: PathBuf,
        #[source]
        source: pvcomb::Error,
    },
    #[error(transparent)]
    Core(#[from] pvcomb::Error),
}

impl CliError {
    /// Stable identifier for machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Schema { .. } => "SchemaError",
            CliError::NonMonotonicTimestamps { .. } => "NonMonotonicTimestamps",
            CliError::EmptyCohort => "EmptyCohort",
            CliError::NoResults => "NoResults",
            CliError::Config(_) => "ConfigError",
            CliError::Io { .. } => "IoError",
            CliError::Csv(_) => "CsvError",
            CliError::Json(_) => "JsonError",
            CliError::Data { source, .. } | CliError::Core(source) => match source {
                pvcomb::Error::MissingThresholdExceeded { .. } => "MissingThresholdExceeded",
                _ => "PipelineError",
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
