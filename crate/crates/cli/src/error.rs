//! Command errors carrying the process exit code.

use paraflow_core::bridging::BridgingError;
use paraflow_core::corpus::CorpusError;
use paraflow_core::discourse::DiscourseError;
use paraflow_core::metrics::MetricsError;
use paraflow_core::models::ModelError;
use thiserror::Error;

/// Exit codes: 0 success, 1 usage, 2 data, 3 numeric divergence.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Diverged(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<DiscourseError> for CliError {
    fn from(e: DiscourseError) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<BridgingError> for CliError {
    fn from(e: BridgingError) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> CliError {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> CliError {
        match e {
            ModelError::Diverged { .. } => CliError::Diverged(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}
