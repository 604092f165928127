//! Shared building blocks: datasets, surrogates, instances and run fan-out.

use persnet::emoo::{run_algorithm, Algorithm, ParetoFront, RunParams};
use persnet::netmodel::{draw_channel_at, Instance, NetworkConfig, ObjectiveVector};
use persnet::satisfaction::{generate_dataset, ContextStream, LabeledSample, Persona, SatisfactionModel, ZotOracle};
use persnet::seeding;
use persnet::surrogate::{train, TrainedSurrogate};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::config::{salt, ExperimentConfig, ModelChoice};
use crate::{HarnessError, Result};

/// Labeled samples from the configured persona.
pub fn build_dataset(cfg: &ExperimentConfig) -> Result<Vec<LabeledSample>> {
    let persona = Persona::working_professional(cfg.persona_seed(), cfg.dataset.users);
    Ok(generate_dataset(&persona, cfg.dataset.slots, cfg.dataset.ts_seconds)?)
}

/// Seeded shuffle into `(train, test)` with `holdout` of the samples in the test part.
pub fn split_holdout(data: &[LabeledSample], holdout: f64, seed: u64) -> (Vec<LabeledSample>, Vec<LabeledSample>) {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut seeding::rng(seed));
    let n_test = (data.len() as f64 * holdout).round() as usize;
    let test = idx[..n_test].iter().map(|&i| data[i].clone()).collect();
    let train = idx[n_test..].iter().map(|&i| data[i].clone()).collect();
    (train, test)
}

/// The first `fraction` of a seeded shuffle (at least one sample).
pub fn subsample(data: &[LabeledSample], fraction: f64, seed: u64) -> Vec<LabeledSample> {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut seeding::rng(seed));
    let n = ((data.len() as f64 * fraction).round() as usize).clamp(1, data.len());
    let mut keep = idx[..n].to_vec();
    keep.sort_unstable();
    keep.into_iter().map(|i| data[i].clone()).collect()
}

pub fn train_surrogate(cfg: &ExperimentConfig, data: &[LabeledSample]) -> Result<TrainedSurrogate> {
    let spec = cfg.training.with_seed(cfg.stream_seed(salt::TRAINING, cfg.training.seed));
    Ok(train(&spec, data)?)
}

/// The satisfaction model an experiment optimizes against.
pub fn resolve_model<'a>(
    cfg: &ExperimentConfig,
    surrogate: Option<&'a TrainedSurrogate>,
) -> Result<&'a dyn SatisfactionModel> {
    match cfg.experiment.model {
        ModelChoice::Oracle => Ok(&ZotOracle),
        ModelChoice::Surrogate => surrogate
            .map(|s| s as &dyn SatisfactionModel)
            .ok_or_else(|| HarnessError::MissingSurrogate("train one first or set experiment.model = \"oracle\"".into())),
    }
}

/// An instance with `users` users: contexts from the first slot of a persona
/// stream, fading drawn at the users' grid cells. `index` selects the stream.
pub fn instance(cfg: &ExperimentConfig, users: usize, index: u64) -> Result<Instance> {
    let net = cfg.network_config()?.with_num_users(users)?;
    let persona = Persona::working_professional(cfg.stream_seed(salt::INSTANCE, index), users as u32);
    let contexts = ContextStream::new(persona, cfg.dataset.ts_seconds)?.next_slot();
    Ok(instance_from_contexts(&net, contexts, cfg.stream_seed(salt::CHANNEL, index))?)
}

pub fn instance_from_contexts(
    net: &NetworkConfig,
    contexts: Vec<persnet::satisfaction::UserContext>,
    channel_seed: u64,
) -> std::result::Result<Instance, persnet::netmodel::NetError> {
    let top = net.grid_size().saturating_sub(1);
    let cells: Vec<(u32, u32)> = contexts.iter().map(|c| (c.location.0.min(top), c.location.1.min(top))).collect();
    let net = net.with_num_users(contexts.len())?;
    let channel = draw_channel_at(&net, &cells, channel_seed);
    Instance::new(net, &channel, contexts)
}

/// Keeps the first `users` users of an instance.
pub fn truncate_instance(inst: &Instance, users: usize) -> Result<Instance> {
    let users = users.min(inst.users());
    let net = inst.cfg.with_num_users(users)?;
    let rbs = inst.rbs();
    let rates = persnet::netmodel::RateMatrix::from_rates(
        users,
        rbs,
        (0..users).flat_map(|u| inst.rates.row(u).to_vec()).collect(),
    )?;
    Ok(Instance::with_rates(net, rates, inst.contexts[..users].to_vec())?)
}

/// One optimizer run request.
#[derive(Debug, Clone)]
pub struct RunJob {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub params: RunParams,
}

/// Executes runs in parallel; output order matches `jobs`.
pub fn run_all(inst: &Instance, model: &dyn SatisfactionModel, jobs: &[RunJob]) -> Result<Vec<ParetoFront>> {
    jobs.par_iter()
        .map(|j| Ok(run_algorithm(j.algorithm, inst, model, &j.params, j.seed)?.front))
        .collect()
}

/// The members a front is judged on: only its feasible ones when the reference
/// set is feasible, otherwise all of them.
pub fn scored_objectives(front: &ParetoFront, reference: &ParetoFront) -> Vec<ObjectiveVector> {
    let feasible_reference = !reference.is_empty() && reference.all_feasible();
    front
        .members
        .iter()
        .filter(|m| !feasible_reference || m.objectives.is_feasible())
        .map(|m| m.objectives)
        .collect()
}

/// Ground-truth objectives of a front's allocations, reduced to the feasible
/// non-dominated subset (possibly empty).
pub fn true_front(inst: &Instance, front: &ParetoFront) -> Result<Vec<ObjectiveVector>> {
    let mut members = Vec::new();
    for m in &front.members {
        let objectives = inst.objectives(&m.genotype, &ZotOracle)?;
        if objectives.is_feasible() {
            members.push(persnet::emoo::Individual { genotype: m.genotype.clone(), objectives });
        }
    }
    Ok(ParetoFront::from_individuals(members).objectives())
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
