//! Single optimization of one instance, with the operating point a network would deploy.

use persnet::emoo::{run_algorithm, select_operating_point};
use persnet::satisfaction::ZotOracle;
use persnet::surrogate::TrainedSurrogate;
use serde::{Deserialize, Serialize};

use crate::config::{salt, ExperimentConfig};
use crate::setup::{instance, resolve_model};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPoint {
    /// Mean saved rate per user, bit/s.
    pub saved_bps: f64,
    /// Mean satisfaction according to the optimizing model.
    pub satisfaction: f64,
    /// Mean satisfaction according to the ground truth.
    pub true_satisfaction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub config_hash: String,
    pub seed: u64,
    pub run_seed: u64,
    pub algorithm: String,
    pub users: usize,
    pub nfe: u64,
    pub target: f64,
    pub front: Vec<FrontPoint>,
    pub operating_point: Option<FrontPoint>,
    pub target_met: bool,
}

/// Optimizes instance 0 with the first configured algorithm.
pub fn run_optimize(cfg: &ExperimentConfig, surrogate: Option<&TrainedSurrogate>) -> Result<OptimizeReport> {
    let model = resolve_model(cfg, surrogate)?;
    let (label, alg) = cfg.algorithms()?.remove(0);
    let inst = instance(cfg, cfg.network.num_users, 0)?;
    let run_seed = cfg.stream_seed(salt::RUN, 0);
    let result = run_algorithm(alg, &inst, model, &cfg.moea, run_seed)?;
    let point = |m: &persnet::emoo::Individual| -> Result<FrontPoint> {
        Ok(FrontPoint {
            saved_bps: m.objectives.f1,
            satisfaction: m.objectives.f2,
            true_satisfaction: inst.objectives(&m.genotype, &ZotOracle)?.f2,
        })
    };
    let front = result.front.members.iter().map(point).collect::<Result<Vec<_>>>()?;
    let target = f64::from(cfg.network.min_satisfaction);
    let op = select_operating_point(&result.front, target);
    Ok(OptimizeReport {
        config_hash: cfg.hash(),
        seed: cfg.experiment.seed,
        run_seed,
        algorithm: label,
        users: inst.users(),
        nfe: result.nfe,
        target,
        target_met: op.as_ref().is_some_and(|o| o.target_met),
        operating_point: op.map(|o| point(&o.individual)).transpose()?,
        front,
    })
}
