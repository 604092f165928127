//! Aggregated comparison report with JSON and CSV output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::api::{api_score, phases, MetricRanks, Phases, METRIC_WEIGHT};
use super::tests::{friedman, posthoc, FriedmanResult, PosthocTable, PosthocTest};
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Indicator {
    Hv,
    Gd,
    Igd,
    Sp,
    Ngr,
}

impl Indicator {
    pub const ALL: [Indicator; 5] = [Indicator::Hv, Indicator::Gd, Indicator::Igd, Indicator::Sp, Indicator::Ngr];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::Hv => "HV",
            Indicator::Gd => "GD",
            Indicator::Igd => "IGD",
            Indicator::Sp => "SP",
            Indicator::Ngr => "NGR",
        }
    }
}

/// Convention used to turn indicator values into ranks.
pub const RANK_ORIENTATION: &str = "higher value receives higher rank; ties averaged";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub rank: f64,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: Indicator,
    pub friedman: FriedmanResult,
    pub friedman_rejected: bool,
    pub algorithms: Vec<AlgorithmSummary>,
    pub posthoc: Vec<PosthocTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiEntry {
    pub algorithm: String,
    pub ngr_mean: f64,
    pub ranks: MetricRanks,
    pub phases: Phases,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub algorithms: Vec<String>,
    pub alpha: f64,
    pub instances: usize,
    pub weight: f64,
    pub rank_orientation: String,
    pub metrics: Vec<MetricSummary>,
    pub api: Vec<ApiEntry>,
}

/// Per-indicator `instances × algorithms` matrices of run-averaged values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSamples {
    pub entries: Vec<(Indicator, Vec<Vec<f64>>)>,
}

impl IndicatorSamples {
    pub fn insert(&mut self, metric: Indicator, matrix: Vec<Vec<f64>>) {
        self.entries.retain(|(m, _)| *m != metric);
        self.entries.push((metric, matrix));
        self.entries.sort_by_key(|(m, _)| *m);
    }

    pub fn get(&self, metric: Indicator) -> Option<&Vec<Vec<f64>>> {
        self.entries.iter().find(|(m, _)| *m == metric).map(|(_, v)| v)
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    metric: &'a str,
    algorithm: &'a str,
    rank: f64,
    mean: f64,
    max: f64,
    min: f64,
    p_value: f64,
    api: f64,
}

impl StatReport {
    /// Runs Friedman, all post-hoc tests, and the API score over every indicator.
    pub fn build(algorithms: &[String], samples: &IndicatorSamples, alpha: f64) -> Result<Self, StatsError> {
        let mut metrics = Vec::new();
        let mut instances = 0;
        for metric in Indicator::ALL {
            let matrix = samples.get(metric).ok_or(StatsError::MissingIndicator(metric.name()))?;
            if matrix.first().map_or(0, Vec::len) != algorithms.len() {
                return Err(StatsError::Ragged);
            }
            let fr = friedman(matrix)?;
            instances = fr.instances;
            let k = algorithms.len();
            let rows = (0..k)
                .map(|j| {
                    let col: Vec<f64> = matrix.iter().map(|r| r[j]).collect();
                    AlgorithmSummary {
                        algorithm: algorithms[j].clone(),
                        rank: fr.avg_ranks[j],
                        mean: col.iter().sum::<f64>() / col.len() as f64,
                        max: col.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                        min: col.iter().copied().fold(f64::INFINITY, f64::min),
                    }
                })
                .collect();
            let posthoc = PosthocTest::ALL
                .iter()
                .map(|&t| posthoc(matrix, t, alpha))
                .collect::<Result<Vec<_>, _>>()?;
            metrics.push(MetricSummary {
                metric,
                friedman_rejected: fr.p_value < alpha,
                friedman: fr,
                algorithms: rows,
                posthoc,
            });
        }
        let rank_of = |m: Indicator, j: usize| metrics.iter().find(|s| s.metric == m).expect("all present").friedman.avg_ranks[j];
        let api = algorithms
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let ranks = MetricRanks {
                    hv: rank_of(Indicator::Hv, j),
                    gd: rank_of(Indicator::Gd, j),
                    igd: rank_of(Indicator::Igd, j),
                    sp: rank_of(Indicator::Sp, j),
                    ngr: rank_of(Indicator::Ngr, j),
                };
                let ngr = samples.get(Indicator::Ngr).expect("checked");
                let ngr_mean = ngr.iter().map(|r| r[j]).sum::<f64>() / ngr.len() as f64;
                ApiEntry {
                    algorithm: name.clone(),
                    ngr_mean,
                    ranks,
                    phases: phases(ngr_mean),
                    score: api_score(&ranks, ngr_mean),
                }
            })
            .collect();
        Ok(StatReport {
            algorithms: algorithms.to_vec(),
            alpha,
            instances,
            weight: METRIC_WEIGHT,
            rank_orientation: RANK_ORIENTATION.to_string(),
            metrics,
            api,
        })
    }

    pub fn to_json(&self) -> Result<String, StatsError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flat table: one row per metric and algorithm.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), StatsError> {
        let mut w = csv::Writer::from_writer(out);
        for m in &self.metrics {
            for (j, row) in m.algorithms.iter().enumerate() {
                w.serialize(CsvRow {
                    metric: m.metric.name(),
                    algorithm: &row.algorithm,
                    rank: row.rank,
                    mean: row.mean,
                    max: row.max,
                    min: row.min,
                    p_value: m.friedman.p_value,
                    api: self.api[j].score,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, json_path: &Path, csv_path: &Path) -> Result<(), StatsError> {
        std::fs::write(json_path, self.to_json()?)?;
        self.write_csv(std::fs::File::create(csv_path)?)
    }
}
