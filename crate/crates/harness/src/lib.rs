//! Experiment orchestration for personalized resource allocation: dataset and
//! surrogate preparation, the comparison, simulation, surrogate-impact and
//! scalability experiments, and result export.

pub mod compare;
pub mod config;
pub mod export;
pub mod impact;
pub mod npn;
pub mod optimize;
pub mod scale;
pub mod setup;
pub mod simulate;

use thiserror::Error;

pub use config::{ExperimentConfig, ExperimentId, ModelChoice, Mode};

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Invalid or unreadable configuration; the CLI exits with code 1.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("surrogate model required but not available: {0}")]
    MissingSurrogate(String),
    #[error("nothing to export: {0}")]
    Empty(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Net(#[from] persnet::netmodel::NetError),
    #[error(transparent)]
    Satisfaction(#[from] persnet::satisfaction::SatisfactionError),
    #[error(transparent)]
    Surrogate(#[from] persnet::surrogate::SurrogateError),
    #[error(transparent)]
    Emoo(#[from] persnet::emoo::EmooError),
    #[error(transparent)]
    Metric(#[from] persnet::metrics::MetricError),
    #[error(transparent)]
    Stats(#[from] persnet::stats::StatsError),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
