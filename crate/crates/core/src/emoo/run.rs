use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::front::ParetoFront;
use super::operators::{init_population, realize, vary, Individual};
use super::{emoea, nsga2, nsga3, spea2, EmooError};
use crate::netmodel::{AllocationMatrix, Evaluator, Instance};
use crate::satisfaction::SatisfactionModel;
use crate::seeding::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Nsga2,
    Nsga3,
    Spea2,
    Emoea,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Nsga2, Algorithm::Nsga3, Algorithm::Spea2, Algorithm::Emoea];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nsga2 => "nsga2",
            Algorithm::Nsga3 => "nsga3",
            Algorithm::Spea2 => "spea2",
            Algorithm::Emoea => "emoea",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = EmooError;
    fn from_str(s: &str) -> Result<Self, EmooError> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "nsga2" | "nsgaii" => Ok(Algorithm::Nsga2),
            "nsga3" | "nsgaiii" => Ok(Algorithm::Nsga3),
            "spea2" => Ok(Algorithm::Spea2),
            "emoea" | "epsmoea" | "epsilonmoea" | "εmoea" => Ok(Algorithm::Emoea),
            _ => Err(EmooError::UnknownAlgorithm(s.to_string())),
        }
    }
}

/// Operator and budget settings shared by all algorithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunParams {
    pub population: usize,
    pub nfe_budget: u64,
    pub crossover_prob: f64,
    /// Per-bit flip probability; `None` means one expected flip per genotype.
    pub mutation_prob: Option<f64>,
    /// Box size for the ε-dominance archive, in normalized objective units.
    pub epsilon: f64,
    /// Divisions of the simplex for NSGA-III reference directions.
    pub nsga3_divisions: usize,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            population: 100,
            nfe_budget: 5000,
            crossover_prob: 0.9,
            mutation_prob: None,
            epsilon: 0.02,
            nsga3_divisions: 99,
        }
    }
}

impl RunParams {
    pub fn with_budget(&self, nfe_budget: u64) -> Self {
        Self { nfe_budget, ..self.clone() }
    }

    pub fn mutation_for(&self, genes: usize) -> f64 {
        self.mutation_prob.unwrap_or(1.0 / genes.max(1) as f64)
    }

    fn validate(&self) -> Result<(), EmooError> {
        let bad = |m: String| Err(EmooError::InvalidParams(m));
        if self.population < 2 {
            return bad("population must be at least 2".into());
        }
        if self.nfe_budget < self.population as u64 {
            return bad(format!("nfe_budget {} is below the population size {}", self.nfe_budget, self.population));
        }
        if !(0.0..=1.0).contains(&self.crossover_prob) {
            return bad("crossover_prob must be in [0, 1]".into());
        }
        if let Some(p) = self.mutation_prob {
            if !(0.0..=1.0).contains(&p) {
                return bad("mutation_prob must be in [0, 1]".into());
            }
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive".into());
        }
        if self.nsga3_divisions == 0 {
            return bad("nsga3_divisions must be at least 1".into());
        }
        Ok(())
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDescriptor {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub nfe_budget: u64,
    pub population: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub epsilon: f64,
    pub nsga3_divisions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub descriptor: RunDescriptor,
    pub front: ParetoFront,
    pub nfe: u64,
}

/// Receives the algorithm's elite set (population front or archive) after
/// initialization and after every generation.
pub trait Observer {
    fn generation(&mut self, nfe: u64, elite: &[Individual]);
}

/// Observer that ignores everything.
pub struct NoObserver;

impl Observer for NoObserver {
    fn generation(&mut self, _: u64, _: &[Individual]) {}
}

impl<F: FnMut(u64, &[Individual])> Observer for F {
    fn generation(&mut self, nfe: u64, elite: &[Individual]) {
        self(nfe, elite)
    }
}

/// Shared state of one run: evaluator, random stream, budget, observer.
pub(super) struct Engine<'a, 'o> {
    pub ev: Evaluator<'a>,
    pub rng: Rng,
    pub params: RunParams,
    pub pm: f64,
    observer: &'o mut dyn Observer,
}

impl Engine<'_, '_> {
    pub fn remaining(&self) -> u64 {
        self.params.nfe_budget.saturating_sub(self.ev.nfe())
    }

    pub fn init(&mut self) -> Vec<Individual> {
        init_population(&self.ev, self.params.population, &mut self.rng)
    }

    pub fn realize(&mut self, g: AllocationMatrix) -> Individual {
        realize(&self.ev, g, &mut self.rng)
    }

    pub fn children(&mut self, p1: &AllocationMatrix, p2: &AllocationMatrix) -> (AllocationMatrix, AllocationMatrix) {
        vary(p1, p2, self.params.crossover_prob, self.pm, &mut self.rng)
    }

    /// Generates up to `count` offspring (never beyond the budget) from parents chosen by `select`.
    pub fn offspring(
        &mut self,
        count: usize,
        mut select: impl FnMut(&mut Rng) -> AllocationMatrix,
    ) -> Vec<Individual> {
        let count = count.min(self.remaining() as usize);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let p1 = select(&mut self.rng);
            let p2 = select(&mut self.rng);
            let (c1, c2) = self.children(&p1, &p2);
            out.push(self.realize(c1));
            if out.len() < count {
                out.push(self.realize(c2));
            }
        }
        out
    }

    pub fn observe(&mut self, elite: &[Individual]) {
        let nfe = self.ev.nfe();
        self.observer.generation(nfe, elite);
    }
}

/// Runs one algorithm to exactly `params.nfe_budget` evaluations.
pub fn run_algorithm(
    algorithm: Algorithm,
    instance: &Instance,
    model: &dyn SatisfactionModel,
    params: &RunParams,
    seed: u64,
) -> Result<RunResult, EmooError> {
    run_algorithm_observed(algorithm, instance, model, params, seed, &mut NoObserver)
}

pub fn run_algorithm_observed(
    algorithm: Algorithm,
    instance: &Instance,
    model: &dyn SatisfactionModel,
    params: &RunParams,
    seed: u64,
    observer: &mut dyn Observer,
) -> Result<RunResult, EmooError> {
    params.validate()?;
    let pm = params.mutation_for(instance.users() * instance.rbs());
    let mut eng = Engine {
        ev: Evaluator::new(instance, model),
        rng: seeding::rng(seeding::derive(seed, algorithm as u64 + 1)),
        params: params.clone(),
        pm,
        observer,
    };
    let elite = match algorithm {
        Algorithm::Nsga2 => nsga2::run(&mut eng),
        Algorithm::Nsga3 => nsga3::run(&mut eng),
        Algorithm::Spea2 => spea2::run(&mut eng),
        Algorithm::Emoea => emoea::run(&mut eng),
    };
    let nfe = eng.ev.nfe();
    debug_assert_eq!(nfe, params.nfe_budget);
    Ok(RunResult {
        descriptor: RunDescriptor {
            algorithm,
            seed,
            nfe_budget: params.nfe_budget,
            population: params.population,
            crossover_prob: params.crossover_prob,
            mutation_prob: pm,
            epsilon: params.epsilon,
            nsga3_divisions: params.nsga3_divisions,
        },
        front: ParetoFront::from_individuals(elite),
        nfe,
    })
}
