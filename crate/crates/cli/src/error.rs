use std::path::Path;
use std::process::ExitCode;

use landslide_gam::inference::InferenceError;
use landslide_gam::ingest::IngestError;
use landslide_gam::model::ModelError;
use landslide_gam::simulate::SimulateError;
use landslide_gam::validate::ValidateError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, configuration or input files.
    #[error("{0}")]
    User(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::User(_) => ExitCode::from(2),
            CliError::Internal(_) => ExitCode::from(1),
        }
    }

    pub fn user(msg: impl Into<String>) -> Self {
        CliError::User(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        CliError::Internal(msg.into())
    }

    /// Attaches the file an input error came from.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::User(m) => CliError::User(format!("{}: {m}", path.display())),
            CliError::Internal(m) => CliError::Internal(format!("{}: {m}", path.display())),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::User(e.to_string())
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::Model(m) => m.into(),
            InferenceError::Shape(_) | InferenceError::UnknownTerm(_) | InferenceError::Config(_) => {
                CliError::User(e.to_string())
            }
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<SimulateError> for CliError {
    fn from(e: SimulateError) -> Self {
        match e {
            SimulateError::Io(_) => CliError::Internal(e.to_string()),
            _ => CliError::User(e.to_string()),
        }
    }
}

impl From<ValidateError> for CliError {
    fn from(e: ValidateError) -> Self {
        match e {
            ValidateError::Model(m) => m.into(),
            ValidateError::Inference(i) => i.into(),
            ValidateError::Simulate(s) => s.into(),
            ValidateError::TooManyFolds { .. }
            | ValidateError::TooFewFolds
            | ValidateError::BadArea(_)
            | ValidateError::NoAreas => CliError::User(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
