//! Constrained bi-objective evolutionary search over allocation matrices.

mod dominance;
mod emoea;
mod front;
mod nsga2;
mod nsga3;
mod operators;
mod run;
mod spea2;

pub use dominance::{
    crowding_distance, dominates, fast_non_dominated_sort, non_dominated_indices, objective_order, pareto_dominates,
};
pub use emoea::{archive_accept, BoxGrid};
pub use front::{build_reference_set, select_operating_point, OperatingPoint, ParetoFront};
pub use nsga3::reference_directions;
pub use operators::{
    binary_tournament, bitflip_mutation, hux_crossover, init_population, random_genotype, realize, vary, Individual,
};
pub use run::{
    run_algorithm, run_algorithm_observed, Algorithm, NoObserver, Observer, RunDescriptor, RunParams, RunResult,
};
pub use spea2::fitness as spea2_fitness;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmooError {
    #[error("unknown algorithm `{0}` (expected nsga2, nsga3, spea2 or emoea)")]
    UnknownAlgorithm(String),
    #[error("invalid run parameters: {0}")]
    InvalidParams(String),
}
