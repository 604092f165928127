//! Nonparametric comparison of algorithms across problem instances.

mod api;
mod dist;
mod ranks;
mod report;
mod sem;

use thiserror::Error;

pub use api::{api_score, phases, MetricRanks, Phases, METRIC_WEIGHT};
pub use dist::{studentized_range_cdf, studentized_range_sf};
pub use ranks::average_ranks;
pub use report::{AlgorithmSummary, ApiEntry, Indicator, IndicatorSamples, MetricSummary, StatReport, RANK_ORIENTATION};
pub use sem::{sample_size_by_sem, sample_std, sem, standard_error, SemGrid};
pub use tests::{
    friedman, mann_whitney, nemenyi_p, posthoc, rank_matrix, wilcoxon_signed_rank, FriedmanResult, PairResult,
    PosthocTable, PosthocTest, EXACT_LIMIT,
};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least 2 instances and 2 algorithms, got {instances} x {algorithms}")]
    InsufficientData { instances: usize, algorithms: usize },
    #[error("rows have differing lengths")]
    Ragged,
    #[error("non-finite sample value")]
    NonFinite,
    #[error("SE_M never fell below {threshold} within {available} samples")]
    NotConverged { threshold: f64, available: usize },
    #[error("indicator {0} missing from samples")]
    MissingIndicator(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
