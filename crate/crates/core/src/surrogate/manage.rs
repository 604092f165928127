use std::fmt;

use serde::{Deserialize, Serialize};

use super::train::TrainedSurrogate;
use crate::satisfaction::{LabeledSample, SatisfactionModel, UserContext};
use crate::seeding;

/// Settings of the feedback correction loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManagerConfig {
    /// Rate adjustment per correction step, kbps.
    pub r_delta_step_kbps: f64,
    /// Retrain after this many mismatches.
    pub buffer_size: usize,
    pub retrain_epochs: usize,
    pub retrain_learning_rate: f64,
    /// Upper bound on correction steps per mismatch.
    pub max_steps: usize,
    /// Largest tolerated drop in buffer accuracy for an update to be kept.
    pub max_accuracy_drop: f64,
    pub seed: u64,
}

impl Default for ManagerConfig {
    fn default() -> Self {
        Self {
            r_delta_step_kbps: 25.0,
            buffer_size: 50,
            retrain_epochs: 30,
            retrain_learning_rate: 0.01,
            max_steps: 40,
            max_accuracy_drop: 0.05,
            seed: 0,
        }
    }
}

/// One observation: the prediction used for allocation and the user's reported level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub context: UserContext,
    pub delta_kbps: f64,
    pub predicted: u8,
    pub measured: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Provide more rate (shortfall shrinks).
    #[serde(rename = "+R_d")]
    More,
    /// Provide less rate (shortfall grows).
    #[serde(rename = "-R_d")]
    Less,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::More => "+R_d",
            Direction::Less => "-R_d",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionEntry {
    pub event: usize,
    pub user_id: u32,
    pub step: usize,
    pub direction: Direction,
    pub target: u8,
    pub delta_kbps: f64,
    pub measured: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrainEntry {
    pub event: usize,
    pub buffer_len: usize,
    pub accuracy_before: f64,
    pub accuracy_after: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct ManageOutcome {
    pub model: TrainedSurrogate,
    pub corrections: Vec<CorrectionEntry>,
    pub retrains: Vec<RetrainEntry>,
    pub buffer: Vec<LabeledSample>,
    pub mismatches: usize,
}

fn observation(ctx: &UserContext, delta_kbps: f64, level: u8) -> LabeledSample {
    let delta = delta_kbps.round() as i64;
    LabeledSample {
        given_rate: (ctx.demand_rate as i64 - delta).max(0) as u32,
        delta,
        satisfaction: level,
        context: ctx.clone(),
    }
}

/// Feedback-driven correction loop.
///
/// On every mismatch the user's rate is stepped by `r_delta_step_kbps` toward the
/// predicted level (more rate when the user is less satisfied than predicted),
/// measuring the user after each step. All observations go to a buffer; every
/// `buffer_size` mismatches the model is fine-tuned on the buffer, and the
/// update is discarded if buffer accuracy falls by more than `max_accuracy_drop`.
pub fn manage_surrogate<I>(
    model: TrainedSurrogate,
    stream: I,
    user: &dyn SatisfactionModel,
    cfg: &ManagerConfig,
) -> ManageOutcome
where
    I: IntoIterator<Item = FeedbackEvent>,
{
    let mut out = ManageOutcome { model, corrections: Vec::new(), retrains: Vec::new(), buffer: Vec::new(), mismatches: 0 };
    for (event, fb) in stream.into_iter().enumerate() {
        if fb.measured == fb.predicted {
            continue;
        }
        out.mismatches += 1;
        out.buffer.push(observation(&fb.context, fb.delta_kbps, fb.measured));
        let direction = if fb.measured < fb.predicted { Direction::More } else { Direction::Less };
        let demand = fb.context.demand_rate as f64;
        let mut delta = fb.delta_kbps;
        for step in 1..=cfg.max_steps {
            let next = match direction {
                Direction::More => (delta - cfg.r_delta_step_kbps).max(0.0),
                Direction::Less => (delta + cfg.r_delta_step_kbps).min(demand),
            };
            if next == delta {
                break;
            }
            delta = next;
            let measured = user.level(&fb.context, delta);
            out.corrections.push(CorrectionEntry {
                event,
                user_id: fb.context.user_id,
                step,
                direction,
                target: fb.predicted,
                delta_kbps: delta,
                measured,
            });
            out.buffer.push(observation(&fb.context, delta, measured));
            let reached = match direction {
                Direction::More => measured >= fb.predicted,
                Direction::Less => measured <= fb.predicted,
            };
            if reached {
                break;
            }
        }
        if cfg.buffer_size > 0 && out.mismatches % cfg.buffer_size == 0 {
            let before = out.model.accuracy(&out.buffer);
            let mut candidate = out.model.clone();
            candidate.fine_tune(
                &out.buffer,
                cfg.retrain_epochs,
                cfg.retrain_learning_rate,
                seeding::derive(cfg.seed, event as u64),
            );
            let after = candidate.accuracy(&out.buffer);
            let accepted = after >= before - cfg.max_accuracy_drop;
            if accepted {
                out.model = candidate;
            }
            out.retrains.push(RetrainEntry {
                event,
                buffer_len: out.buffer.len(),
                accuracy_before: before,
                accuracy_after: after,
                accepted,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::satisfaction::{generate_dataset, Persona, ZotOracle};
    use crate::surrogate::{train, SurrogateSpec};

    fn small_model() -> TrainedSurrogate {
        let data = generate_dataset(&Persona::working_professional(2, 2), 300, 1).unwrap();
        train(&SurrogateSpec { epochs: 2, ..SurrogateSpec::default() }, &data).unwrap()
    }

    #[test]
    fn no_mismatch_is_a_no_op() {
        let model = small_model();
        let ctx = UserContext::synthetic(0, 800, 200);
        let stream = (0..20).map(|_| FeedbackEvent { context: ctx.clone(), delta_kbps: 10.0, predicted: 4, measured: 4 });
        let out = manage_surrogate(model.clone(), stream, &ZotOracle, &ManagerConfig::default());
        assert_eq!(out.model, model);
        assert!(out.corrections.is_empty() && out.retrains.is_empty() && out.buffer.is_empty());
    }

    #[test]
    fn under_satisfied_user_gets_more_rate() {
        let ctx = UserContext::synthetic(0, 800, 200);
        // Δ = 60 of 200 → level 3 measured, level 4 predicted.
        let ev = FeedbackEvent { context: ctx, delta_kbps: 60.0, predicted: 4, measured: 3 };
        let out = manage_surrogate(small_model(), [ev], &ZotOracle, &ManagerConfig::default());
        let first = &out.corrections[0];
        assert_eq!(first.direction, Direction::More);
        assert_eq!(first.direction.to_string(), "+R_d");
        assert_eq!(first.delta_kbps, 35.0);
        assert_eq!(first.measured, 4);
        assert_eq!(out.corrections.len(), 1);
    }

    #[test]
    fn over_satisfied_user_gets_less_rate() {
        let ctx = UserContext::synthetic(0, 800, 200);
        let ev = FeedbackEvent { context: ctx, delta_kbps: 0.0, predicted: 3, measured: 5 };
        let out = manage_surrogate(small_model(), [ev], &ZotOracle, &ManagerConfig::default());
        assert!(out.corrections.iter().all(|c| c.direction == Direction::Less));
        assert_eq!(out.corrections.last().unwrap().measured, 3);
    }
}
