//! Learned satisfaction surrogate: context encoding, a small feed-forward
//! classifier, stratified cross-validation and the feedback-driven
//! management loop.

mod cv;
mod encoder;
mod manage;
mod network;
mod train;

pub use cv::{cross_validate, stratified_folds, CvReport, Learner, OracleLearner};
pub use encoder::{FeatureEncoder, SparseInput, CATEGORICAL_FIELDS, NUMERIC_FEATURES, RATIO_CAP};
pub use manage::{
    manage_surrogate, CorrectionEntry, Direction, FeedbackEvent, ManageOutcome, ManagerConfig, RetrainEntry,
};
pub use network::Mlp;
pub use train::{balance_indices, train, SurrogateSpec, TrainedSurrogate, TrainingMeta, MODEL_FORMAT_VERSION};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SurrogateError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("degenerate labels: no samples for level(s) {0:?}")]
    DegenerateLabels(Vec<u8>),
    #[error("invalid surrogate spec: {0}")]
    InvalidSpec(String),
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
}
