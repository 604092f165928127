//! Experiment configuration: a sectioned TOML file with documented defaults.

use std::path::{Path, PathBuf};

use persnet::emoo::{Algorithm, RunParams};
use persnet::netmodel::{NetworkConfig, NetworkParams};
use persnet::seeding;
use persnet::surrogate::{ManagerConfig, SurrogateSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    Compare,
    Simulate,
    SurrogateImpact,
    Scalability,
}

/// Which satisfaction model the optimizers query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    /// Trained surrogate (personalized network with estimated satisfaction).
    Surrogate,
    /// Ground-truth zone-of-tolerance levels.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Npn,
    Fpn,
    Spn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub id: ExperimentId,
    pub seed: u64,
    /// Algorithm names; a name may repeat, later copies get a `#n` suffix.
    pub algorithms: Vec<String>,
    pub model: ModelChoice,
    pub paper_scale: bool,
    /// Per-user satisfaction constraint while measuring front quality (compare,
    /// surrogate impact, scalability). `network.min_satisfaction` stays the
    /// target for optimize and simulate.
    pub front_min_satisfaction: u8,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            id: ExperimentId::Compare,
            seed: 1,
            algorithms: Algorithm::ALL.iter().map(|a| a.name().to_string()).collect(),
            model: ModelChoice::Surrogate,
            paper_scale: false,
            front_min_satisfaction: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub users: u32,
    pub slots: usize,
    pub ts_seconds: u32,
    /// Persona seed; derived from the experiment seed when absent.
    pub persona_seed: Option<u64>,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self { users: 10, slots: 5000, ts_seconds: 1, persona_seed: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateSection {
    /// Saved model; defaults to `<out>/surrogate.json`.
    pub model_path: Option<PathBuf>,
    pub cv_folds: usize,
    /// Share of the dataset held out when reporting accuracy.
    pub holdout: f64,
}

impl Default for SurrogateSection {
    fn default() -> Self {
        Self { model_path: None, cv_folds: 10, holdout: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    /// Problem instances (N_m).
    pub instances: usize,
    /// Measured runs per algorithm and instance (N_s).
    pub runs: usize,
    /// Runs per algorithm merged into each instance's reference set.
    pub reference_runs: usize,
    pub alpha: f64,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self { instances: 30, runs: 30, reference_runs: 30, alpha: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub length_s: u32,
    pub ts_s: u32,
    pub window_s: u32,
    pub modes: Vec<Mode>,
    pub algorithm: String,
    /// Run the feedback correction loop on the surrogate between windows.
    pub manage_surrogate: bool,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            length_s: 300,
            ts_s: 1,
            window_s: 30,
            modes: vec![Mode::Npn, Mode::Fpn, Mode::Spn],
            algorithm: "nsga2".into(),
            manage_surrogate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpactSection {
    pub fractions: Vec<f64>,
    pub runs: usize,
    /// Also run with the ground-truth model as a perfect surrogate.
    pub include_oracle: bool,
}

impl Default for ImpactSection {
    fn default() -> Self {
        Self { fractions: vec![0.01, 0.1, 0.5, 1.0], runs: 30, include_oracle: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalabilitySection {
    pub users: Vec<usize>,
    pub nfes: Vec<u64>,
    /// Users in the NFE sweep.
    pub fixed_users: usize,
    /// Budget in the user sweep.
    pub fixed_nfe: u64,
    pub runs: usize,
}

impl Default for ScalabilitySection {
    fn default() -> Self {
        Self {
            users: vec![2, 4, 6, 8],
            nfes: vec![500, 1000, 2000, 3000, 4000, 5000],
            fixed_users: 6,
            fixed_nfe: 1000,
            runs: 30,
        }
    }
}

/// Complete, self-describing experiment setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub network: NetworkParams,
    pub moea: RunParams,
    pub dataset: DatasetSection,
    pub training: SurrogateSpec,
    pub surrogate: SurrogateSection,
    pub management: ManagerConfig,
    pub compare: CompareSection,
    pub simulation: SimulationSection,
    pub surrogate_impact: ImpactSection,
    pub scalability: ScalabilitySection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentSection::default(),
            network: NetworkParams::default(),
            moea: RunParams { nfe_budget: 1000, ..RunParams::default() },
            dataset: DatasetSection::default(),
            training: SurrogateSpec::default(),
            surrogate: SurrogateSection::default(),
            management: ManagerConfig::default(),
            compare: CompareSection::default(),
            simulation: SimulationSection::default(),
            surrogate_impact: ImpactSection::default(),
            scalability: ScalabilitySection::default(),
        }
    }
}

/// Seed streams; every stochastic component draws from one of these.
pub mod salt {
    pub const PERSONA: u64 = 0x9e25_0001;
    pub const INSTANCE: u64 = 0x9e25_0002;
    pub const REFERENCE_RUN: u64 = 0x9e25_0003;
    pub const RUN: u64 = 0x9e25_0004;
    pub const CHANNEL: u64 = 0x9e25_0005;
    pub const TRAINING: u64 = 0x9e25_0006;
    pub const SPLIT: u64 = 0x9e25_0007;
    pub const SLOT: u64 = 0x9e25_0008;
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        let cfg = if cfg.experiment.paper_scale { cfg.paper_scale() } else { cfg };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Full-length simulation and the larger evaluation budget.
    pub fn paper_scale(mut self) -> Self {
        self.experiment.paper_scale = true;
        self.moea.nfe_budget = 5000;
        self.simulation.length_s = 3000;
        self.scalability.fixed_nfe = 5000;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.experiment.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        self.network_config()?;
        self.front_config().network_config()?;
        self.algorithms()?;
        self.training.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.moea.nfe_budget < self.moea.population as u64 {
            return bad("moea.nfe_budget must be at least moea.population".into());
        }
        if self.compare.instances == 0 || self.compare.runs == 0 || self.compare.reference_runs == 0 {
            return bad("compare.instances, runs and reference_runs must be at least 1".into());
        }
        if !(self.compare.alpha > 0.0 && self.compare.alpha < 1.0) {
            return bad("compare.alpha must be in (0, 1)".into());
        }
        let sim = &self.simulation;
        if sim.ts_s == 0 || sim.window_s == 0 || sim.length_s < sim.ts_s {
            return bad("simulation.ts_s and window_s must be positive and length_s ≥ ts_s".into());
        }
        if sim.window_s % sim.ts_s != 0 {
            return bad("simulation.window_s must be a multiple of ts_s".into());
        }
        if sim.modes.is_empty() {
            return bad("simulation.modes needs at least one of npn, fpn, spn".into());
        }
        sim.algorithm.parse::<Algorithm>().map_err(|e| HarnessError::Config(e.to_string()))?;
        let imp = &self.surrogate_impact;
        if imp.fractions.is_empty() || imp.fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return bad("surrogate_impact.fractions must be in (0, 1]".into());
        }
        if imp.runs == 0 {
            return bad("surrogate_impact.runs must be at least 1".into());
        }
        let sc = &self.scalability;
        if sc.users.is_empty() || sc.nfes.is_empty() || sc.users.contains(&0) || sc.fixed_users == 0 || sc.runs == 0 {
            return bad("scalability grids must be non-empty with positive entries".into());
        }
        if sc.nfes.iter().chain([&sc.fixed_nfe]).any(|&n| n < self.moea.population as u64) {
            return bad("scalability budgets must be at least moea.population".into());
        }
        if self.dataset.users == 0 || self.dataset.slots == 0 {
            return bad("dataset.users and dataset.slots must be positive".into());
        }
        if !(0.0..1.0).contains(&self.surrogate.holdout) {
            return bad("surrogate.holdout must be in [0, 1)".into());
        }
        Ok(())
    }

    /// This configuration with the front-quality satisfaction constraint in place.
    pub fn front_config(&self) -> Self {
        let mut cfg = self.clone();
        cfg.network.min_satisfaction = self.experiment.front_min_satisfaction;
        cfg
    }

    pub fn network_config(&self) -> Result<NetworkConfig, HarnessError> {
        NetworkConfig::try_from(self.network.clone()).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Algorithms with display labels; repeated names are suffixed `#2`, `#3`, ….
    pub fn algorithms(&self) -> Result<Vec<(String, Algorithm)>, HarnessError> {
        if self.experiment.algorithms.is_empty() {
            return Err(HarnessError::Config("experiment.algorithms is empty".into()));
        }
        let mut out: Vec<(String, Algorithm)> = Vec::new();
        for name in &self.experiment.algorithms {
            let alg: Algorithm = name.parse().map_err(|e: persnet::emoo::EmooError| HarnessError::Config(e.to_string()))?;
            let copies = out.iter().filter(|(_, a)| *a == alg).count();
            let label = if copies == 0 { alg.name().to_string() } else { format!("{}#{}", alg.name(), copies + 1) };
            out.push((label, alg));
        }
        Ok(out)
    }

    pub fn persona_seed(&self) -> u64 {
        self.dataset.persona_seed.unwrap_or_else(|| seeding::derive(self.experiment.seed, salt::PERSONA))
    }

    /// Seed of a named stream, further split by `index`.
    pub fn stream_seed(&self, salt: u64, index: u64) -> u64 {
        seeding::derive(seeding::derive(self.experiment.seed, salt), index)
    }

    /// SHA-256 over the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config is always serializable");
        hex::encode(Sha256::digest(&json))
    }

    pub fn model_path(&self, out_dir: &Path) -> PathBuf {
        self.surrogate.model_path.clone().unwrap_or_else(|| out_dir.join("surrogate.json"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.compare.instances, 30);
        assert_eq!(cfg.compare.runs, 30);
        assert_eq!(cfg.simulation.window_s, 30);
        assert_eq!(cfg.simulation.ts_s, 1);
        assert_eq!(cfg.moea.nfe_budget, 1000);
    }

    #[test]
    fn paper_scale_flag_in_file() {
        let cfg = ExperimentConfig::from_toml_str("[experiment]\npaper_scale = true\n").unwrap();
        assert_eq!(cfg.simulation.length_s, 3000);
        assert_eq!(cfg.moea.nfe_budget, 5000);
    }

    #[test]
    fn partial_sections_and_roundtrip() {
        let text = "[network]\nnum_users = 6\n[moea]\nnfe_budget = 300\n[compare]\ninstances = 2\n";
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.network.num_users, 6);
        assert_eq!(cfg.network.num_rbs, 100);
        assert_eq!(cfg.moea.population, 100);
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        assert_ne!(cfg.clone().with_seed(2).hash(), cfg.hash());
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "[network]\nnum_rbs = 0\n",
            "[experiment]\nalgorithms = [\"moead\"]\n",
            "[nonsense]\nx = 1\n",
            "[moea]\nnfe_budget = 10\n",
            "[simulation]\nwindow_s = 7\nts_s = 2\n",
            "[surrogate_impact]\nfractions = [0.0]\n",
            "[experiment]\nfront_min_satisfaction = 6\n",
        ] {
            assert!(matches!(ExperimentConfig::from_toml_str(text), Err(HarnessError::Config(_))), "{text}");
        }
    }

    #[test]
    fn repeated_algorithms_get_distinct_labels() {
        let cfg = ExperimentConfig::from_toml_str("[experiment]\nalgorithms = [\"nsga2\", \"nsga2\"]\n").unwrap();
        let labels: Vec<String> = cfg.algorithms().unwrap().into_iter().map(|(l, _)| l).collect();
        assert_eq!(labels, ["nsga2", "nsga2#2"]);
    }
}
