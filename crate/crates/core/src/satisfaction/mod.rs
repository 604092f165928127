//! User context, Zone-of-Tolerance satisfaction behavior, synthetic
//! persona-driven datasets and CSV ingestion.

mod dataset;
mod persona;
mod zot;

pub use dataset::{
    dataset_hash, ingest_csv, ingest_reader, write_csv, write_csv_to, IngestReport, SkippedRow,
    CSV_HEADER, USER_ID_COLUMN,
};
pub use persona::{generate_dataset, AppProfile, ContextStream, Persona, ServiceProfile};
pub use zot::{zot_level, zot_level_for, ZotOracle, ZOT_THRESHOLDS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lowest and highest satisfaction level.
pub const MIN_LEVEL: u8 = 1;
pub const MAX_LEVEL: u8 = 5;
/// Number of satisfaction classes.
pub const NUM_LEVELS: usize = 5;

#[derive(Debug, Error)]
pub enum SatisfactionError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("missing header")]
    MissingHeader,
    #[error("missing mandatory column `{0}`")]
    MissingColumn(String),
    #[error("invalid persona: {0}")]
    InvalidPersona(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One row of user context: where the user is, what they do, and what they ask for.
///
/// Rates are integer kbps. `max_delta` is the user's tolerance for a shortfall
/// in provided rate before satisfaction bottoms out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserContext {
    pub user_id: u32,
    pub date: String,
    pub time: String,
    pub day: String,
    pub classified_day: String,
    pub time_period: String,
    pub location: (u32, u32),
    pub location_name: String,
    pub speed_kmh: f64,
    pub speed_range: String,
    pub activity: String,
    pub request_arrived: bool,
    pub application: String,
    pub service: String,
    pub demand_rate: u32,
    pub min_rate: u32,
    pub max_delta: u32,
}

impl UserContext {
    /// A neutral context carrying only a demand and a tolerance (kbps).
    pub fn synthetic(user_id: u32, demand_rate: u32, max_delta: u32) -> Self {
        let max_delta = max_delta.min(demand_rate);
        Self {
            user_id,
            date: "2018-01-08".into(),
            time: "08:00:00".into(),
            day: "Monday".into(),
            classified_day: "Weekday".into(),
            time_period: "Morning".into(),
            location: (0, 0),
            location_name: "home".into(),
            speed_kmh: 0.0,
            speed_range: "low".into(),
            activity: "Sitting".into(),
            request_arrived: true,
            application: "Browser".into(),
            service: "Web page".into(),
            demand_rate,
            min_rate: demand_rate - max_delta,
            max_delta,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.demand_rate >= self.min_rate && self.speed_kmh.is_finite() && self.speed_kmh >= 0.0
    }
}

/// A context together with the rate actually given and the satisfaction it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub context: UserContext,
    pub given_rate: u32,
    /// `demand_rate - given_rate`, kbps. Negative when the user got more than asked.
    pub delta: i64,
    pub satisfaction: u8,
}

/// Anything that maps a context and a rate shortfall (kbps) to a satisfaction level 1..=5.
pub trait SatisfactionModel: Send + Sync {
    fn level(&self, ctx: &UserContext, delta_kbps: f64) -> u8;
}

impl<T: SatisfactionModel + ?Sized> SatisfactionModel for &T {
    fn level(&self, ctx: &UserContext, delta_kbps: f64) -> u8 {
        (**self).level(ctx, delta_kbps)
    }
}

impl<T: SatisfactionModel + ?Sized> SatisfactionModel for std::sync::Arc<T> {
    fn level(&self, ctx: &UserContext, delta_kbps: f64) -> u8 {
        (**self).level(ctx, delta_kbps)
    }
}
