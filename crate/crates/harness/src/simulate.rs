//! Time-slot simulation of the non-personalized, oracle-personalized and
//! surrogate-personalized networks on identical contexts and channels.

use persnet::emoo::{run_algorithm, select_operating_point, Algorithm};
use persnet::netmodel::{AllocationMatrix, Instance};
use persnet::satisfaction::{ContextStream, Persona, SatisfactionModel, ZotOracle};
use persnet::surrogate::{manage_surrogate, FeedbackEvent, RetrainEntry, TrainedSurrogate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{salt, ExperimentConfig, Mode};
use crate::npn::{npn_allocate, total_rate};
use crate::setup::instance_from_contexts;
use crate::{HarnessError, Result};

/// Outcome of one personalized mode in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeOutcome {
    pub rate_bps: f64,
    /// Provided-rate reduction relative to the non-personalized network, bit/s.
    pub saved_bps: f64,
    /// Mean satisfaction according to the model used for optimization.
    pub estimated: f64,
    /// Mean satisfaction reported by the users (ground truth).
    pub feedback: f64,
    /// The front held a point meeting the satisfaction target.
    pub target_met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: usize,
    pub time_s: u32,
    pub run_seed: u64,
    pub npn_rate_bps: f64,
    pub npn_satisfaction: f64,
    pub fpn: Option<ModeOutcome>,
    pub spn: Option<ModeOutcome>,
}

/// Per-window means of the slot values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub window: usize,
    pub start_s: u32,
    pub slots: usize,
    pub npn_saved_bps: f64,
    pub npn_satisfaction: f64,
    pub fpn_saved_bps: Option<f64>,
    pub fpn_satisfaction: Option<f64>,
    pub fpn_target_met_slots: usize,
    pub spn_saved_bps: Option<f64>,
    pub spn_estimated: Option<f64>,
    pub spn_feedback: Option<f64>,
    pub spn_target_met_slots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config_hash: String,
    pub seed: u64,
    pub persona_seed: u64,
    pub algorithm: String,
    pub target: f64,
    pub modes: Vec<Mode>,
    pub slots: Vec<SlotRecord>,
    pub windows: Vec<SimulationRecord>,
    pub retrains: Vec<RetrainEntry>,
}

fn outcome(
    inst: &Instance,
    model: &dyn SatisfactionModel,
    alg: Algorithm,
    cfg: &ExperimentConfig,
    seed: u64,
    npn_rate: f64,
    target: f64,
) -> Result<(ModeOutcome, AllocationMatrix)> {
    let front = run_algorithm(alg, inst, model, &cfg.moea, seed)?.front;
    let op = select_operating_point(&front, target).ok_or_else(|| HarnessError::Empty("empty front".into()))?;
    let alloc = op.individual.genotype;
    let rate = total_rate(inst, &alloc);
    let feedback = inst.objectives(&alloc, &ZotOracle)?.f2;
    Ok((
        ModeOutcome {
            rate_bps: rate,
            saved_bps: npn_rate - rate,
            estimated: op.individual.objectives.f2,
            feedback,
            target_met: op.target_met,
        },
        alloc,
    ))
}

fn mean_of(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Window aggregate of consecutive slot records.
pub fn aggregate(window: usize, slots: &[SlotRecord]) -> SimulationRecord {
    let opt_mean = |f: &dyn Fn(&SlotRecord) -> Option<f64>| -> Option<f64> {
        let vals: Vec<f64> = slots.iter().filter_map(f).collect();
        (!vals.is_empty()).then(|| mean_of(vals.into_iter()))
    };
    SimulationRecord {
        window,
        start_s: slots.first().map_or(0, |s| s.time_s),
        slots: slots.len(),
        npn_saved_bps: 0.0,
        npn_satisfaction: mean_of(slots.iter().map(|s| s.npn_satisfaction)),
        fpn_saved_bps: opt_mean(&|s| s.fpn.map(|o| o.saved_bps)),
        fpn_satisfaction: opt_mean(&|s| s.fpn.map(|o| o.feedback)),
        fpn_target_met_slots: slots.iter().filter(|s| s.fpn.is_some_and(|o| o.target_met)).count(),
        spn_saved_bps: opt_mean(&|s| s.spn.map(|o| o.saved_bps)),
        spn_estimated: opt_mean(&|s| s.spn.map(|o| o.estimated)),
        spn_feedback: opt_mean(&|s| s.spn.map(|o| o.feedback)),
        spn_target_met_slots: slots.iter().filter(|s| s.spn.is_some_and(|o| o.target_met)).count(),
    }
}

/// Runs every slot of the configured horizon and aggregates per window.
///
/// All modes see the same contexts and channel within a slot, and the two
/// personalized modes use the same optimizer seed. When surrogate management is
/// enabled, the model is corrected with the feedback of each finished window.
pub fn run_simulation(cfg: &ExperimentConfig, surrogate: Option<&TrainedSurrogate>) -> Result<SimulationReport> {
    let sim = &cfg.simulation;
    let want = |m: Mode| sim.modes.contains(&m);
    if want(Mode::Spn) && surrogate.is_none() {
        return Err(HarnessError::MissingSurrogate("simulation mode spn".into()));
    }
    let alg: Algorithm = sim.algorithm.parse()?;
    let net = cfg.network_config()?;
    let target = f64::from(cfg.network.min_satisfaction);
    let persona_seed = cfg.stream_seed(salt::PERSONA, 0);
    let mut stream = ContextStream::new(Persona::working_professional(persona_seed, cfg.network.num_users as u32), sim.ts_s)?;
    let num_slots = (sim.length_s / sim.ts_s) as usize;
    let per_window = (sim.window_s / sim.ts_s) as usize;
    let contexts: Vec<_> = (0..num_slots).map(|_| stream.next_slot()).collect();
    let mut model = surrogate.cloned();
    let mut slots = Vec::with_capacity(num_slots);
    let mut retrains = Vec::new();
    for (w, window_contexts) in contexts.chunks(per_window).enumerate() {
        let first = w * per_window;
        let results: Vec<(SlotRecord, Vec<FeedbackEvent>)> = window_contexts
            .par_iter()
            .enumerate()
            .map(|(j, ctx)| {
                let slot = first + j;
                let inst = instance_from_contexts(&net, ctx.clone(), cfg.stream_seed(salt::CHANNEL, slot as u64))?;
                let npn = npn_allocate(&inst);
                let npn_rate = total_rate(&inst, &npn);
                let run_seed = cfg.stream_seed(salt::SLOT, slot as u64);
                let fpn = if want(Mode::Fpn) {
                    Some(outcome(&inst, &ZotOracle, alg, cfg, run_seed, npn_rate, target)?.0)
                } else {
                    None
                };
                let mut events = Vec::new();
                let spn = match (&model, want(Mode::Spn)) {
                    (Some(m), true) => {
                        let (o, alloc) = outcome(&inst, m, alg, cfg, run_seed, npn_rate, target)?;
                        let report = inst.rate_report(&alloc);
                        for (u, c) in inst.contexts.iter().enumerate() {
                            let delta_kbps = report.user_delta[u] / 1e3;
                            events.push(FeedbackEvent {
                                context: c.clone(),
                                delta_kbps,
                                predicted: m.level(c, delta_kbps),
                                measured: ZotOracle.level(c, delta_kbps),
                            });
                        }
                        Some(o)
                    }
                    _ => None,
                };
                let record = SlotRecord {
                    slot,
                    time_s: slot as u32 * sim.ts_s,
                    run_seed,
                    npn_rate_bps: npn_rate,
                    npn_satisfaction: inst.objectives(&npn, &ZotOracle)?.f2,
                    fpn,
                    spn,
                };
                Ok((record, events))
            })
            .collect::<Result<_>>()?;
        let mut events = Vec::new();
        for (record, ev) in results {
            slots.push(record);
            events.extend(ev);
        }
        if sim.manage_surrogate {
            if let Some(m) = model.take() {
                let outcome = manage_surrogate(m, events, &ZotOracle, &cfg.management);
                retrains.extend(outcome.retrains);
                model = Some(outcome.model);
            }
        }
    }
    let windows = slots.chunks(per_window).enumerate().map(|(w, s)| aggregate(w, s)).collect();
    Ok(SimulationReport {
        config_hash: cfg.hash(),
        seed: cfg.experiment.seed,
        persona_seed,
        algorithm: alg.name().to_string(),
        target,
        modes: sim.modes.clone(),
        slots,
        windows,
        retrains,
    })
}
