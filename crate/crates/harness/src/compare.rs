//! Statistical comparison of the algorithms over many instances.

use persnet::emoo::{build_reference_set, ParetoFront};
use persnet::metrics::evaluate_front;
use persnet::netmodel::ObjectiveVector;
use persnet::seeding;
use persnet::stats::{Indicator, IndicatorSamples, StatReport};
use persnet::surrogate::TrainedSurrogate;
use serde::{Deserialize, Serialize};

use crate::config::{salt, ExperimentConfig};
use crate::setup::{instance, resolve_model, run_all, scored_objectives, RunJob};
use crate::Result;

/// Indicator values of one front (or an average over runs).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Indicators {
    pub hv: f64,
    pub gd: f64,
    pub igd: f64,
    pub sp: f64,
    pub ngr: f64,
}

impl Indicators {
    pub fn get(&self, m: Indicator) -> f64 {
        match m {
            Indicator::Hv => self.hv,
            Indicator::Gd => self.gd,
            Indicator::Igd => self.igd,
            Indicator::Sp => self.sp,
            Indicator::Ngr => self.ngr,
        }
    }

    fn mean(all: &[Indicators]) -> Indicators {
        let n = all.len() as f64;
        let avg = |f: fn(&Indicators) -> f64| all.iter().map(f).sum::<f64>() / n;
        Indicators { hv: avg(|i| i.hv), gd: avg(|i| i.gd), igd: avg(|i| i.igd), sp: avg(|i| i.sp), ngr: avg(|i| i.ngr) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub instance: usize,
    pub algorithm: String,
    pub run: usize,
    pub run_seed: u64,
    pub front_size: usize,
    pub indicators: Indicators,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetrics {
    pub instance: usize,
    pub algorithm: String,
    pub reference_size: usize,
    /// Means over the measured runs.
    pub indicators: Indicators,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub config_hash: String,
    pub seed: u64,
    pub algorithms: Vec<String>,
    pub instances: usize,
    pub runs: usize,
    pub run_metrics: Vec<RunMetrics>,
    pub instance_metrics: Vec<InstanceMetrics>,
    pub stats: Option<StatReport>,
    /// Why the statistical tests were skipped, when they were.
    pub stats_note: Option<String>,
}

impl CompareReport {
    /// `instances × algorithms` matrix of one indicator.
    pub fn matrix(&self, m: Indicator) -> Vec<Vec<f64>> {
        let k = self.algorithms.len();
        self.instance_metrics.chunks(k).map(|row| row.iter().map(|c| c.indicators.get(m)).collect()).collect()
    }
}

/// Indicators of the scored members of a front. A front with nothing to score
/// gets no volume or size and the largest distance in the normalized square.
fn indicators(scored: &[ObjectiveVector], reference: &[ObjectiveVector]) -> Result<Indicators> {
    if scored.is_empty() {
        let worst = std::f64::consts::SQRT_2;
        return Ok(Indicators { hv: 0.0, gd: worst, igd: worst, sp: 0.0, ngr: 0.0 });
    }
    let rep = evaluate_front(scored, reference)?;
    Ok(Indicators { hv: rep.hv, gd: rep.gd, igd: rep.igd, sp: rep.sp, ngr: rep.ngr })
}

fn run_seed(cfg: &ExperimentConfig, stream: u64, instance: usize, run: usize) -> u64 {
    seeding::derive(cfg.stream_seed(stream, instance as u64), run as u64)
}

/// For each instance: a reference set from `reference_runs` runs per algorithm,
/// then `runs` measured runs per algorithm scored against it; the per-instance
/// means feed the Friedman, post-hoc and API analysis.
pub fn run_compare(cfg: &ExperimentConfig, surrogate: Option<&TrainedSurrogate>) -> Result<CompareReport> {
    let model = resolve_model(cfg, surrogate)?;
    let algorithms = cfg.algorithms()?;
    let cmp = &cfg.compare;
    let front_cfg = cfg.front_config();
    let mut run_metrics = Vec::new();
    let mut instance_metrics = Vec::new();
    for i in 0..cmp.instances {
        let inst = instance(&front_cfg, cfg.network.num_users, i as u64)?;
        let jobs = |stream: u64, count: usize| -> Vec<RunJob> {
            algorithms
                .iter()
                .flat_map(|(_, alg)| {
                    (0..count).map(move |r| RunJob { algorithm: *alg, seed: run_seed(cfg, stream, i, r), params: cfg.moea.clone() })
                })
                .collect()
        };
        let reference_fronts = run_all(&inst, model, &jobs(salt::REFERENCE_RUN, cmp.reference_runs))?;
        let reference_front = build_reference_set(reference_fronts.iter());
        let reference = reference_front.objectives();
        let measured_jobs = jobs(salt::RUN, cmp.runs);
        let measured: Vec<ParetoFront> = run_all(&inst, model, &measured_jobs)?;
        for (a, (label, _)) in algorithms.iter().enumerate() {
            let mut per_run = Vec::with_capacity(cmp.runs);
            for r in 0..cmp.runs {
                let k = a * cmp.runs + r;
                let front = &measured[k];
                let ind = indicators(&scored_objectives(front, &reference_front), &reference)?;
                per_run.push(ind);
                run_metrics.push(RunMetrics {
                    instance: i,
                    algorithm: label.clone(),
                    run: r,
                    run_seed: measured_jobs[k].seed,
                    front_size: front.len(),
                    indicators: ind,
                });
            }
            instance_metrics.push(InstanceMetrics {
                instance: i,
                algorithm: label.clone(),
                reference_size: reference.len(),
                indicators: Indicators::mean(&per_run),
            });
        }
    }
    let labels: Vec<String> = algorithms.iter().map(|(l, _)| l.clone()).collect();
    let mut report = CompareReport {
        config_hash: cfg.hash(),
        seed: cfg.experiment.seed,
        algorithms: labels.clone(),
        instances: cmp.instances,
        runs: cmp.runs,
        run_metrics,
        instance_metrics,
        stats: None,
        stats_note: None,
    };
    if labels.len() < 2 || cmp.instances < 2 {
        report.stats_note = Some(format!(
            "insufficient data: {} instance(s) × {} algorithm(s); need at least 2 of each",
            cmp.instances,
            labels.len()
        ));
    } else {
        let mut samples = IndicatorSamples::default();
        for m in Indicator::ALL {
            samples.insert(m, report.matrix(m));
        }
        report.stats = Some(StatReport::build(&labels, &samples, cmp.alpha)?);
    }
    Ok(report)
}
