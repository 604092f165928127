//! Front quality as the number of users and the evaluation budget grow.

use persnet::emoo::{build_reference_set, ParetoFront};
use persnet::metrics::{hypervolume, Normalization, HV_REFERENCE_POINT};
use persnet::netmodel::Instance;
use persnet::satisfaction::SatisfactionModel;
use persnet::surrogate::TrainedSurrogate;
use serde::{Deserialize, Serialize};

use crate::config::{salt, ExperimentConfig};
use crate::setup::{instance, mean, median, resolve_model, run_all, scored_objectives, truncate_instance, RunJob};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleCell {
    pub algorithm: String,
    pub users: usize,
    pub nfe: u64,
    pub mean_hv: f64,
    pub median_hv: f64,
    /// HV of the sweep's reference set itself, the ceiling for `hv`.
    pub reference_hv: f64,
    pub hv: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub config_hash: String,
    pub seed: u64,
    pub runs: usize,
    /// Cells at `fixed_nfe` for every user count.
    pub user_sweep: Vec<ScaleCell>,
    /// Cells at `fixed_users` for every budget.
    pub nfe_sweep: Vec<ScaleCell>,
}

/// Runs every (algorithm, budget) pair `runs` times on `inst`; HV of each front's
/// scored members is measured in the normalization of the reference set merged
/// from all of these runs.
fn sweep(
    cfg: &ExperimentConfig,
    inst: &Instance,
    model: &dyn SatisfactionModel,
    budgets: &[u64],
) -> Result<Vec<ScaleCell>> {
    let runs = cfg.scalability.runs;
    let algorithms = cfg.algorithms()?;
    let mut jobs = Vec::new();
    for &nfe in budgets {
        for (_, alg) in &algorithms {
            for r in 0..runs {
                jobs.push(RunJob {
                    algorithm: *alg,
                    seed: cfg.stream_seed(salt::RUN, r as u64),
                    params: cfg.moea.with_budget(nfe),
                });
            }
        }
    }
    let fronts: Vec<ParetoFront> = run_all(inst, model, &jobs)?;
    let reference = build_reference_set(fronts.iter());
    let norm = Normalization::from_reference(&reference.objectives());
    let reference_hv = hypervolume(&norm.apply_all(&reference.objectives()), HV_REFERENCE_POINT);
    let mut cells = Vec::new();
    for (b, &nfe) in budgets.iter().enumerate() {
        for (a, (label, _)) in algorithms.iter().enumerate() {
            let start = (b * algorithms.len() + a) * runs;
            let hv: Vec<f64> = fronts[start..start + runs]
                .iter()
                .map(|f| hypervolume(&norm.apply_all(&scored_objectives(f, &reference)), HV_REFERENCE_POINT))
                .collect();
            cells.push(ScaleCell {
                algorithm: label.clone(),
                users: inst.users(),
                nfe,
                mean_hv: mean(&hv),
                median_hv: median(&hv),
                reference_hv,
                hv,
            });
        }
    }
    Ok(cells)
}

/// Both sweeps share one base instance; smaller user counts keep its first users.
pub fn run_scalability(cfg: &ExperimentConfig, surrogate: Option<&TrainedSurrogate>) -> Result<ScaleReport> {
    let model = resolve_model(cfg, surrogate)?;
    let sc = &cfg.scalability;
    let largest = sc.users.iter().copied().chain([sc.fixed_users]).max().unwrap_or(1);
    let base = instance(&cfg.front_config(), largest, 0)?;
    let mut user_sweep = Vec::new();
    for &users in &sc.users {
        user_sweep.extend(sweep(cfg, &truncate_instance(&base, users)?, model, &[sc.fixed_nfe])?);
    }
    let nfe_sweep = sweep(cfg, &truncate_instance(&base, sc.fixed_users)?, model, &sc.nfes)?;
    Ok(ScaleReport { config_hash: cfg.hash(), seed: cfg.experiment.seed, runs: sc.runs, user_sweep, nfe_sweep })
}
