#![allow(dead_code)]

use persnet::netmodel::{Instance, NetworkConfig, RateMatrix};
use persnet::satisfaction::UserContext;
use persnet_harness::config::{ExperimentConfig, ModelChoice};

/// Fast configuration: small budgets, few instances and runs, short simulation.
pub fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default().with_seed(11);
    cfg.experiment.model = ModelChoice::Oracle;
    cfg.moea.population = 20;
    cfg.moea.nfe_budget = 200;
    cfg.compare.instances = 3;
    cfg.compare.runs = 3;
    cfg.compare.reference_runs = 2;
    cfg.dataset.users = 2;
    cfg.dataset.slots = 300;
    cfg.training.epochs = 2;
    cfg.training.hidden_layers = vec![16, 8];
    cfg.simulation.length_s = 10;
    cfg.simulation.window_s = 2;
    cfg.surrogate_impact.fractions = vec![0.25, 1.0];
    cfg.surrogate_impact.runs = 2;
    cfg.scalability.users = vec![2, 4];
    cfg.scalability.nfes = vec![100, 200];
    cfg.scalability.fixed_users = 2;
    cfg.scalability.fixed_nfe = 100;
    cfg.scalability.runs = 2;
    cfg
}

/// Instance with hand-set per-RB rates (kbit/s, user-major) and demands (kbit/s).
pub fn hand_instance(rates_kbps: &[f64], users: usize, demand_kbps: &[u32]) -> Instance {
    let rbs = rates_kbps.len() / users;
    let cfg = NetworkConfig::default().with_num_rbs(rbs).and_then(|c| c.with_num_users(users)).unwrap();
    let rates = RateMatrix::from_rates(users, rbs, rates_kbps.iter().map(|r| r * 1e3).collect()).unwrap();
    let ctx = demand_kbps.iter().enumerate().map(|(u, &d)| UserContext::synthetic(u as u32, d, d / 2)).collect();
    Instance::with_rates(cfg, rates, ctx).unwrap()
}
