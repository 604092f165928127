//! How surrogate accuracy (via training-set size) shows up in front quality.

use persnet::emoo::{build_reference_set, ParetoFront};
use persnet::metrics::{hypervolume, Normalization, HV_REFERENCE_POINT};
use persnet::satisfaction::{SatisfactionModel, ZotOracle};
use serde::{Deserialize, Serialize};

use crate::config::{salt, ExperimentConfig};
use crate::setup::{build_dataset, instance, mean, median, run_all, split_holdout, subsample, train_surrogate, true_front, RunJob};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmHv {
    pub algorithm: String,
    pub mean_hv: f64,
    pub median_hv: f64,
    pub hv: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactRow {
    /// `None` for the ground-truth model used as a perfect surrogate.
    pub fraction: Option<f64>,
    pub train_samples: usize,
    /// Accuracy on the held-out samples.
    pub accuracy: f64,
    pub algorithms: Vec<AlgorithmHv>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactReport {
    pub config_hash: String,
    pub seed: u64,
    /// Index of the instance stream used.
    pub instance: u64,
    pub users: usize,
    pub runs: usize,
    pub nfe: u64,
    pub reference_size: usize,
    pub rows: Vec<ImpactRow>,
}

/// Instance candidates tried when looking for one that admits a feasible allocation.
const INSTANCE_CANDIDATES: u64 = 50;

/// One surrogate per training fraction, each driving `runs` runs of every
/// algorithm on a fixed instance. Fronts are re-scored with the ground truth
/// (infeasible members dropped) and their HV measured in the normalization of
/// a reference set built from ground-truth-driven runs.
///
/// The instance is the first one on which the ground-truth runs find a feasible
/// allocation (instance 0 when none of the candidates does); on an infeasible
/// instance every HV would be zero.
pub fn run_surrogate_impact(cfg: &ExperimentConfig) -> Result<ImpactReport> {
    let imp = &cfg.surrogate_impact;
    let algorithms = cfg.algorithms()?;
    let data = build_dataset(cfg)?;
    let (pool, test) = split_holdout(&data, cfg.surrogate.holdout, cfg.stream_seed(salt::SPLIT, 0));
    let jobs = |stream: u64| -> Vec<RunJob> {
        algorithms
            .iter()
            .flat_map(|(_, alg)| {
                (0..imp.runs).map(move |r| RunJob {
                    algorithm: *alg,
                    seed: cfg.stream_seed(stream, r as u64),
                    params: cfg.moea.clone(),
                })
            })
            .collect()
    };
    let front_cfg = cfg.front_config();
    let mut chosen = None;
    for index in 0..INSTANCE_CANDIDATES {
        let inst = instance(&front_cfg, cfg.network.num_users, index)?;
        let reference = build_reference_set(run_all(&inst, &ZotOracle, &jobs(salt::REFERENCE_RUN))?.iter());
        let feasible = !reference.is_empty() && reference.all_feasible();
        if feasible || chosen.is_none() {
            chosen = Some((index, inst, reference));
        }
        if feasible {
            break;
        }
    }
    let (index, inst, reference) = chosen.expect("at least one candidate");
    let norm = Normalization::from_reference(&reference.objectives());
    let score = |model: &dyn SatisfactionModel| -> Result<Vec<AlgorithmHv>> {
        let fronts: Vec<ParetoFront> = run_all(&inst, model, &jobs(salt::RUN))?;
        let mut out = Vec::new();
        for (a, (label, _)) in algorithms.iter().enumerate() {
            let hv = fronts[a * imp.runs..(a + 1) * imp.runs]
                .iter()
                .map(|f| Ok(hypervolume(&norm.apply_all(&true_front(&inst, f)?), HV_REFERENCE_POINT)))
                .collect::<Result<Vec<f64>>>()?;
            out.push(AlgorithmHv { algorithm: label.clone(), mean_hv: mean(&hv), median_hv: median(&hv), hv });
        }
        Ok(out)
    };
    let mut rows = Vec::new();
    for (i, &fraction) in imp.fractions.iter().enumerate() {
        let train_set = subsample(&pool, fraction, cfg.stream_seed(salt::SPLIT, 1 + i as u64));
        let model = train_surrogate(cfg, &train_set)?;
        let accuracy = if test.is_empty() { model.accuracy(&pool) } else { model.accuracy(&test) };
        rows.push(ImpactRow { fraction: Some(fraction), train_samples: train_set.len(), accuracy, algorithms: score(&model)? });
    }
    if imp.include_oracle {
        rows.push(ImpactRow { fraction: None, train_samples: 0, accuracy: 1.0, algorithms: score(&ZotOracle)? });
    }
    Ok(ImpactReport {
        config_hash: cfg.hash(),
        seed: cfg.experiment.seed,
        instance: index,
        users: inst.users(),
        runs: imp.runs,
        nfe: cfg.moea.nfe_budget,
        reference_size: reference.len(),
        rows,
    })
}
