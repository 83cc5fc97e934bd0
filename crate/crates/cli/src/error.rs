use std::path::PathBuf;

use h2asym::acceptance::AcceptanceError;
use h2asym::analysis::AnalysisError;
use h2asym::config::ConfigError;
use h2asym::eventgen::EventGenError;
use h2asym::format::FormatError;
use h2asym::model::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Events { path: PathBuf, source: FormatError },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    EventGen(#[from] EventGenError),
    #[error(transparent)]
    Suite(#[from] AcceptanceError),
    #[error("{failed} of {total} acceptance criteria failed")]
    AcceptanceFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Suite(_) | CliError::AcceptanceFailed { .. } => 4,
            _ => 3,
        }
    }
}
