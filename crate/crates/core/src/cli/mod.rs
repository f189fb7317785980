//! Experiment configuration, pipeline execution, and report emission.

mod config;
mod report;
mod runner;
mod suites;

pub use config::{
    CodeKind, DistributionKind, ExperimentConfig, Pipeline, ProtocolSource, TaskSource,
};
pub use report::{CheckRow, RunReport, REPORT_SCHEMA_VERSION};
pub use runner::{inspect_file, run_config, RunOptions};
pub use suites::{verify_suite, Suite};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("report serialization: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Comm(#[from] crate::comm::CommError),

    #[error(transparent)]
    Convert(#[from] crate::convert::ConvertError),

    #[error(transparent)]
    Shadow(#[from] crate::shadows::ShadowError),

    #[error(transparent)]
    Oneshot(#[from] crate::oneshot::OneshotError),

    #[error(transparent)]
    Pgm(#[from] crate::pgm::PgmError),

    #[error(transparent)]
    Qcore(#[from] crate::qcore::QcoreError),
}

pub type Result<T> = std::result::Result<T, CliError>;
