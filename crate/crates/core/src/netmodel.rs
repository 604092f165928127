//! Single-cell downlink model: channel gains, SNR, per-RB Shannon rates,
//! the user × RB allocation genotype, feasibility repair and objective evaluation.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::satisfaction::{SatisfactionModel, UserContext};
use crate::seeding;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid network config: {0}")]
    InvalidConfig(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("allocation is not repaired: RB {0} is assigned to more than one user")]
    Unrepaired(usize),
    #[error("config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config file: {0}")]
    Parse(#[from] toml::de::Error),
}

/// Network parameters as written in configuration files. Noise density is in dBm/Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkParams {
    pub num_rbs: usize,
    pub rb_bandwidth_hz: f64,
    pub noise_density_dbm_hz: f64,
    pub carrier_freq_hz: f64,
    pub max_power_w: f64,
    pub grid_size: u32,
    pub num_users: usize,
    pub min_satisfaction: u8,
    pub cell_radius_m: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            num_rbs: 100,
            rb_bandwidth_hz: 180e3,
            noise_density_dbm_hz: -174.0,
            carrier_freq_hz: 2e9,
            max_power_w: 1.0,
            grid_size: 100,
            num_users: 4,
            min_satisfaction: 4,
            cell_radius_m: 500.0,
        }
    }
}

/// Validated physical-layer and problem constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkParams", into = "NetworkParams")]
pub struct NetworkConfig {
    params: NetworkParams,
    noise_density_w_hz: f64,
}

pub fn dbm_per_hz_to_w_per_hz(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl TryFrom<NetworkParams> for NetworkConfig {
    type Error = NetError;

    fn try_from(params: NetworkParams) -> Result<Self, NetError> {
        let bad = |m: &str| Err(NetError::InvalidConfig(m.to_string()));
        if params.num_rbs == 0 {
            return bad("num_rbs must be at least 1");
        }
        if params.num_users == 0 {
            return bad("num_users must be at least 1");
        }
        if !(params.rb_bandwidth_hz > 0.0 && params.rb_bandwidth_hz.is_finite()) {
            return bad("rb_bandwidth_hz must be positive");
        }
        if !params.noise_density_dbm_hz.is_finite() {
            return bad("noise_density_dbm_hz must be finite");
        }
        if !(params.max_power_w > 0.0 && params.max_power_w.is_finite()) {
            return bad("max_power_w must be positive");
        }
        if !(1..=5).contains(&params.min_satisfaction) {
            return bad("min_satisfaction must be in 1..=5");
        }
        if params.grid_size == 0 {
            return bad("grid_size must be at least 1");
        }
        if !(params.cell_radius_m > MIN_DISTANCE_M) {
            return bad("cell_radius_m must exceed the 10 m minimum distance");
        }
        if !(params.carrier_freq_hz > 0.0) {
            return bad("carrier_freq_hz must be positive");
        }
        let noise_density_w_hz = dbm_per_hz_to_w_per_hz(params.noise_density_dbm_hz);
        Ok(Self { params, noise_density_w_hz })
    }
}

impl From<NetworkConfig> for NetworkParams {
    fn from(cfg: NetworkConfig) -> Self {
        cfg.params
    }
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkParams::default().try_into().expect("defaults are valid")
    }
}

impl NetworkConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, NetError> {
        let params: NetworkParams = toml::from_str(text)?;
        params.try_into()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, NetError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }
    pub fn num_rbs(&self) -> usize {
        self.params.num_rbs
    }
    pub fn num_users(&self) -> usize {
        self.params.num_users
    }
    pub fn rb_bandwidth_hz(&self) -> f64 {
        self.params.rb_bandwidth_hz
    }
    pub fn noise_density_w_hz(&self) -> f64 {
        self.noise_density_w_hz
    }
    pub fn max_power_w(&self) -> f64 {
        self.params.max_power_w
    }
    pub fn grid_size(&self) -> u32 {
        self.params.grid_size
    }
    pub fn min_satisfaction(&self) -> u8 {
        self.params.min_satisfaction
    }
    pub fn cell_radius_m(&self) -> f64 {
        self.params.cell_radius_m
    }
    /// Equal split of the power budget over all RBs.
    pub fn per_rb_power_w(&self) -> f64 {
        self.params.max_power_w / self.params.num_rbs as f64
    }
    /// Noise power over one RB, `N0 * B_RB`.
    pub fn noise_power_w(&self) -> f64 {
        self.noise_density_w_hz * self.params.rb_bandwidth_hz
    }

    pub fn with_num_users(&self, num_users: usize) -> Result<Self, NetError> {
        let mut p = self.params.clone();
        p.num_users = num_users;
        p.try_into()
    }

    pub fn with_min_satisfaction(&self, level: u8) -> Result<Self, NetError> {
        let mut p = self.params.clone();
        p.min_satisfaction = level;
        p.try_into()
    }

    pub fn with_num_rbs(&self, num_rbs: usize) -> Result<Self, NetError> {
        let mut p = self.params.clone();
        p.num_rbs = num_rbs;
        p.try_into()
    }
}

pub const MIN_DISTANCE_M: f64 = 10.0;

/// Log-distance macro-cell path loss in dB, `d` in meters.
pub fn path_loss_db(d: f64) -> f64 {
    38.46 + 35.0 * d.log10()
}

/// eNB-to-cell distance. The k × k grid is mapped onto the cell disc with the
/// concentric square-to-disc map, under which the radius is the Chebyshev norm
/// of the cell center in `[-1, 1]²`.
pub fn cell_distance_m(cfg: &NetworkConfig, cell: (u32, u32)) -> f64 {
    let k = cfg.grid_size() as f64;
    let a = 2.0 * (cell.0 as f64 + 0.5) / k - 1.0;
    let b = 2.0 * (cell.1 as f64 + 0.5) / k - 1.0;
    (a.abs().max(b.abs()) * cfg.cell_radius_m()).max(MIN_DISTANCE_M)
}

/// Block-fading channel for one time slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    users: usize,
    rbs: usize,
    gains: Vec<f64>,
    positions: Vec<(u32, u32)>,
    seed: u64,
}

impl ChannelState {
    /// Channel from explicit gains (row-major `users × rbs`).
    pub fn from_gains(
        users: usize,
        rbs: usize,
        gains: Vec<f64>,
        positions: Vec<(u32, u32)>,
    ) -> Result<Self, NetError> {
        if gains.len() != users * rbs || positions.len() != users {
            return Err(NetError::Shape(format!(
                "{} gains / {} positions for {users} users × {rbs} RBs",
                gains.len(),
                positions.len()
            )));
        }
        if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(NetError::InvalidChannel(format!("gain {g} is not strictly positive")));
        }
        Ok(Self { users, rbs, gains, positions, seed: 0 })
    }

    pub fn users(&self) -> usize {
        self.users
    }
    pub fn rbs(&self) -> usize {
        self.rbs
    }
    pub fn gain(&self, user: usize, rb: usize) -> f64 {
        self.gains[user * self.rbs + rb]
    }
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }
    pub fn positions(&self) -> &[(u32, u32)] {
        &self.positions
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Keeps the first `users` rows.
    pub fn truncate_users(&self, users: usize) -> Self {
        let users = users.min(self.users);
        Self {
            users,
            rbs: self.rbs,
            gains: self.gains[..users * self.rbs].to_vec(),
            positions: self.positions[..users].to_vec(),
            seed: self.seed,
        }
    }
}

/// `|g|²` for a unit-variance circularly-symmetric complex Gaussian `g`.
pub fn rayleigh_power<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        let p = 0.5 * (re * re + im * im);
        if p > 0.0 {
            return p;
        }
    }
}

/// Uniform user placement on the grid, then Rayleigh block fading per (user, RB).
pub fn draw_channel(cfg: &NetworkConfig, seed: u64) -> ChannelState {
    let mut rng = seeding::rng(seeding::derive(seed, 0xce11));
    let k = cfg.grid_size();
    let positions: Vec<(u32, u32)> = (0..cfg.num_users())
        .map(|_| (rng.random_range(0..k), rng.random_range(0..k)))
        .collect();
    draw_channel_at(cfg, &positions, seed)
}

/// Rayleigh block fading for users at known grid cells.
pub fn draw_channel_at(cfg: &NetworkConfig, positions: &[(u32, u32)], seed: u64) -> ChannelState {
    let mut rng = seeding::rng(seeding::derive(seed, 0xfade));
    let rbs = cfg.num_rbs();
    let mut gains = Vec::with_capacity(positions.len() * rbs);
    for &cell in positions {
        let mean = 10f64.powf(-path_loss_db(cell_distance_m(cfg, cell)) / 10.0);
        for _ in 0..rbs {
            gains.push(rayleigh_power(&mut rng) * mean);
        }
    }
    ChannelState { users: positions.len(), rbs, gains, positions: positions.to_vec(), seed }
}

/// SNR of `user` on `rb` with the fixed per-RB power.
pub fn snr(cfg: &NetworkConfig, ch: &ChannelState, user: usize, rb: usize) -> f64 {
    cfg.per_rb_power_w() * ch.gain(user, rb) / cfg.noise_power_w()
}

/// Shannon rate of one RB, bit/s.
pub fn rb_rate(cfg: &NetworkConfig, gamma: f64) -> f64 {
    cfg.rb_bandwidth_hz() * (1.0 + gamma).log2()
}

/// Achievable rate of every (user, RB) pair, bit/s, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateMatrix {
    users: usize,
    rbs: usize,
    rates: Vec<f64>,
}

impl RateMatrix {
    pub fn compute(cfg: &NetworkConfig, ch: &ChannelState) -> Self {
        let rates = (0..ch.users())
            .flat_map(|u| (0..ch.rbs()).map(move |n| (u, n)))
            .map(|(u, n)| rb_rate(cfg, snr(cfg, ch, u, n)))
            .collect();
        Self { users: ch.users(), rbs: ch.rbs(), rates }
    }

    pub fn from_rates(users: usize, rbs: usize, rates: Vec<f64>) -> Result<Self, NetError> {
        if rates.len() != users * rbs {
            return Err(NetError::Shape(format!("{} rates for {users} × {rbs}", rates.len())));
        }
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(NetError::InvalidChannel("rates must be finite and non-negative".into()));
        }
        Ok(Self { users, rbs, rates })
    }

    pub fn users(&self) -> usize {
        self.users
    }
    pub fn rbs(&self) -> usize {
        self.rbs
    }
    #[inline]
    pub fn rate(&self, user: usize, rb: usize) -> f64 {
        self.rates[user * self.rbs + rb]
    }
    pub fn row(&self, user: usize) -> &[f64] {
        &self.rates[user * self.rbs..(user + 1) * self.rbs]
    }
}

/// Binary user × RB assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AllocationMatrix {
    users: usize,
    rbs: usize,
    bits: Vec<bool>,
}

impl AllocationMatrix {
    pub fn zeros(users: usize, rbs: usize) -> Self {
        Self { users, rbs, bits: vec![false; users * rbs] }
    }

    pub fn from_bits(users: usize, rbs: usize, bits: Vec<bool>) -> Result<Self, NetError> {
        if bits.len() != users * rbs {
            return Err(NetError::Shape(format!("{} bits for {users} × {rbs}", bits.len())));
        }
        Ok(Self { users, rbs, bits })
    }

    /// One owner per RB (`None` = unassigned).
    pub fn from_owners(users: usize, owners: &[Option<usize>]) -> Self {
        let mut m = Self::zeros(users, owners.len());
        for (n, o) in owners.iter().enumerate() {
            if let Some(u) = o {
                m.set(*u, n, true);
            }
        }
        m
    }

    pub fn users(&self) -> usize {
        self.users
    }
    pub fn rbs(&self) -> usize {
        self.rbs
    }
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }
    #[inline]
    pub fn get(&self, user: usize, rb: usize) -> bool {
        self.bits[user * self.rbs + rb]
    }
    #[inline]
    pub fn set(&mut self, user: usize, rb: usize, v: bool) {
        self.bits[user * self.rbs + rb] = v;
    }
    pub fn column_sum(&self, rb: usize) -> usize {
        (0..self.users).filter(|&u| self.get(u, rb)).count()
    }
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
    pub fn hamming(&self, other: &Self) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }
    /// RBs held by `user`.
    pub fn assigned(&self, user: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.rbs).filter(move |&n| self.get(user, n))
    }
    /// First RB with more than one owner, if any.
    pub fn first_conflict(&self) -> Option<usize> {
        (0..self.rbs).find(|&n| self.column_sum(n) > 1)
    }
    pub fn owner(&self, rb: usize) -> Option<usize> {
        (0..self.users).find(|&u| self.get(u, rb))
    }
}

/// Rate bookkeeping for one allocation (all rates in bit/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub user_rate: Vec<f64>,
    pub demand: Vec<f64>,
    pub user_delta: Vec<f64>,
    pub sum_delta: f64,
    pub total_rate: f64,
}

impl RateReport {
    pub fn compute(rates: &RateMatrix, alloc: &AllocationMatrix, demand_bps: &[f64]) -> Self {
        let user_rate: Vec<f64> = (0..alloc.users())
            .map(|u| alloc.assigned(u).map(|n| rates.rate(u, n)).sum())
            .collect();
        let user_delta: Vec<f64> = demand_bps.iter().zip(&user_rate).map(|(d, r)| d - r).collect();
        Self {
            sum_delta: user_delta.iter().sum(),
            total_rate: user_rate.iter().sum(),
            demand: demand_bps.to_vec(),
            user_rate,
            user_delta,
        }
    }
}

/// Makes `alloc` satisfy one-owner-per-RB and rate ≤ demand.
///
/// Conflicting columns keep one owner chosen uniformly at random. A user whose
/// rate exceeds demand loses RBs in ascending rate order (ties by RB index)
/// until the rate no longer exceeds demand. The drop may overshoot.
pub fn repair<R: Rng + ?Sized>(
    alloc: &mut AllocationMatrix,
    rates: &RateMatrix,
    demand_bps: &[f64],
    rng: &mut R,
) {
    let users = alloc.users();
    let mut owners = Vec::with_capacity(users);
    for n in 0..alloc.rbs() {
        owners.clear();
        owners.extend((0..users).filter(|&u| alloc.get(u, n)));
        if owners.len() > 1 {
            let keep = *owners.choose(rng).expect("non-empty");
            for &u in &owners {
                if u != keep {
                    alloc.set(u, n, false);
                }
            }
        }
    }
    let mut held: Vec<usize> = Vec::new();
    for u in 0..users {
        held.clear();
        held.extend(alloc.assigned(u));
        let mut rate: f64 = held.iter().map(|&n| rates.rate(u, n)).sum();
        if rate <= demand_bps[u] {
            continue;
        }
        held.sort_by(|&a, &b| rates.rate(u, a).total_cmp(&rates.rate(u, b)).then(a.cmp(&b)));
        for &n in &held {
            if rate <= demand_bps[u] {
                break;
            }
            alloc.set(u, n, false);
            rate -= rates.rate(u, n);
        }
    }
}

/// Both objectives (maximized) and the minimum-satisfaction violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    /// Mean saved rate `D_u - R_u` over users, bit/s.
    pub f1: f64,
    /// Mean satisfaction level.
    pub f2: f64,
    /// `Σ_u max(0, S_min - S_u)`; zero means feasible.
    pub violation: f64,
}

impl ObjectiveVector {
    pub fn new(f1: f64, f2: f64, violation: f64) -> Self {
        Self { f1, f2, violation }
    }
    pub fn is_feasible(&self) -> bool {
        self.violation <= 0.0
    }
}

/// One optimization instance: users, their contexts, and the frozen channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Instance {
    pub cfg: NetworkConfig,
    pub rates: RateMatrix,
    pub contexts: Vec<UserContext>,
    pub demand_bps: Vec<f64>,
}

impl Instance {
    pub fn new(cfg: NetworkConfig, channel: &ChannelState, contexts: Vec<UserContext>) -> Result<Self, NetError> {
        let rates = RateMatrix::compute(&cfg, channel);
        Self::with_rates(cfg, rates, contexts)
    }

    pub fn with_rates(cfg: NetworkConfig, rates: RateMatrix, contexts: Vec<UserContext>) -> Result<Self, NetError> {
        if rates.users() != contexts.len() || rates.rbs() != cfg.num_rbs() {
            return Err(NetError::Shape(format!(
                "{} × {} rates, {} contexts, {} RBs configured",
                rates.users(),
                rates.rbs(),
                contexts.len(),
                cfg.num_rbs()
            )));
        }
        let demand_bps = contexts.iter().map(|c| c.demand_rate as f64 * 1e3).collect();
        Ok(Self { cfg, rates, contexts, demand_bps })
    }

    pub fn users(&self) -> usize {
        self.contexts.len()
    }
    pub fn rbs(&self) -> usize {
        self.rates.rbs()
    }
    pub fn mean_demand_bps(&self) -> f64 {
        self.demand_bps.iter().sum::<f64>() / self.users() as f64
    }

    pub fn repair<R: Rng + ?Sized>(&self, alloc: &mut AllocationMatrix, rng: &mut R) {
        repair(alloc, &self.rates, &self.demand_bps, rng)
    }

    pub fn rate_report(&self, alloc: &AllocationMatrix) -> RateReport {
        RateReport::compute(&self.rates, alloc, &self.demand_bps)
    }

    /// Per-user satisfaction levels of an allocation under `model`.
    pub fn satisfaction(&self, alloc: &AllocationMatrix, model: &dyn SatisfactionModel) -> Vec<u8> {
        let report = self.rate_report(alloc);
        self.contexts
            .iter()
            .zip(&report.user_delta)
            .map(|(ctx, d)| model.level(ctx, d / 1e3))
            .collect()
    }

    /// Objectives of a repaired allocation. Does not count towards any NFE budget.
    pub fn objectives(
        &self,
        alloc: &AllocationMatrix,
        model: &dyn SatisfactionModel,
    ) -> Result<ObjectiveVector, NetError> {
        if alloc.users() != self.users() || alloc.rbs() != self.rbs() {
            return Err(NetError::Shape("allocation shape does not match instance".into()));
        }
        if let Some(n) = alloc.first_conflict() {
            return Err(NetError::Unrepaired(n));
        }
        let users = self.users() as f64;
        let s_min = self.cfg.min_satisfaction() as f64;
        let mut f1 = 0.0;
        let mut f2 = 0.0;
        let mut violation = 0.0;
        for (u, ctx) in self.contexts.iter().enumerate() {
            let rate: f64 = alloc.assigned(u).map(|n| self.rates.rate(u, n)).sum();
            let delta = self.demand_bps[u] - rate;
            let level = model.level(ctx, delta / 1e3) as f64;
            f1 += delta;
            f2 += level;
            violation += (s_min - level).max(0.0);
        }
        Ok(ObjectiveVector { f1: f1 / users, f2: f2 / users, violation })
    }
}

/// Instance + satisfaction model + evaluation counter.
pub struct Evaluator<'a> {
    instance: &'a Instance,
    model: &'a dyn SatisfactionModel,
    nfe: AtomicU64,
}

impl<'a> Evaluator<'a> {
    pub fn new(instance: &'a Instance, model: &'a dyn SatisfactionModel) -> Self {
        Self { instance, model, nfe: AtomicU64::new(0) }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn model(&self) -> &'a dyn SatisfactionModel {
        self.model
    }

    /// Evaluates and counts one function evaluation.
    pub fn evaluate(&self, alloc: &AllocationMatrix) -> Result<ObjectiveVector, NetError> {
        let v = self.instance.objectives(alloc, self.model)?;
        self.nfe.fetch_add(1, Ordering::Relaxed);
        Ok(v)
    }

    pub fn nfe(&self) -> u64 {
        self.nfe.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::satisfaction::ZotOracle;
    use proptest::prelude::*;
    use rand::Rng;

    fn context(demand: u32, max_delta: u32) -> UserContext {
        UserContext::synthetic(0, demand, max_delta)
    }

    fn cfg() -> NetworkConfig {
        NetworkConfig::default()
    }

    #[test]
    fn noise_conversion() {
        let n0 = cfg().noise_density_w_hz();
        assert!((n0 / 3.981_071_705_534_97e-21 - 1.0).abs() < 1e-12);
        assert!((cfg().noise_power_w() / 7.165_929e-16 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut p = NetworkParams::default();
        p.num_rbs = 0;
        assert!(NetworkConfig::try_from(p).is_err());
        let mut p = NetworkParams::default();
        p.min_satisfaction = 6;
        assert!(NetworkConfig::try_from(p).is_err());
        let mut p = NetworkParams::default();
        p.rb_bandwidth_hz = 0.0;
        assert!(NetworkConfig::try_from(p).is_err());
    }

    #[test]
    fn config_file_keys() {
        let text = "num_rbs = 50\nrb_bandwidth_hz = 180000.0\nnoise_density_dbm_hz = -174.0\n\
                    carrier_freq_hz = 2e9\nmax_power_w = 1.0\ngrid_size = 100\nnum_users = 6\n\
                    min_satisfaction = 3\ncell_radius_m = 500.0\n";
        let c = NetworkConfig::from_toml_str(text).unwrap();
        assert_eq!(c.num_rbs(), 50);
        assert_eq!(c.num_users(), 6);
        assert!((c.per_rb_power_w() - 0.02).abs() < 1e-15);
        let partial = NetworkConfig::from_toml_str("num_rbs = 50\n").unwrap();
        assert_eq!((partial.num_rbs(), partial.num_users()), (50, 4));
        assert!(NetworkConfig::from_toml_str("num_rbs = 0\n").is_err());
        assert!(NetworkConfig::from_toml_str(&format!("{text}bogus = 1\n")).is_err());
    }

    #[test]
    fn channel_is_deterministic_and_positive() {
        let c = cfg();
        let a = draw_channel(&c, 42);
        assert_eq!(a, draw_channel(&c, 42));
        assert_ne!(a, draw_channel(&c, 43));
        assert_eq!(a.users(), 4);
        assert_eq!(a.rbs(), 100);
        assert!(a.gains().iter().all(|g| g.is_finite() && *g > 0.0));
        assert!(a.positions().iter().all(|&(x, y)| x < 100 && y < 100));
    }

    #[test]
    fn rayleigh_power_has_unit_mean() {
        let mut rng = seeding::rng(1);
        let n = 100_000;
        let mean = (0..n).map(|_| rayleigh_power(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn snr_by_substitution() {
        // per-RB power 1e-2 W, N0·B = 7.164e-16 W: h = 7.164e-14 gives γ = 1e-2·100 = 1,
        // and h = 7.164e-11 gives γ = 1000.
        let mut p = NetworkParams::default();
        p.num_rbs = 100;
        p.max_power_w = 1.0;
        p.rb_bandwidth_hz = 180e3;
        p.noise_density_dbm_hz = 30.0 + 10.0 * (7.164e-16f64 / 180e3).log10();
        let c = NetworkConfig::try_from(p).unwrap();
        assert!((c.noise_power_w() / 7.164e-16 - 1.0).abs() < 1e-12);
        let ch = ChannelState::from_gains(1, 100, vec![7.164e-14; 100], vec![(0, 0)]).unwrap();
        assert!((snr(&c, &ch, 0, 0) - 1.0).abs() < 1e-9);
        let ch = ChannelState::from_gains(1, 100, vec![7.164e-11; 100], vec![(0, 0)]).unwrap();
        assert!((snr(&c, &ch, 0, 0) / 1000.0 - 1.0).abs() < 1e-9);
        let ch2 = ChannelState::from_gains(1, 100, vec![2.0 * 7.164e-11; 100], vec![(0, 0)]).unwrap();
        assert!((snr(&c, &ch2, 0, 0) / snr(&c, &ch, 0, 0) - 2.0).abs() < 1e-12);
        let mut p = c.params().clone();
        p.noise_density_dbm_hz += 10.0 * 2f64.log10();
        let c2 = NetworkConfig::try_from(p).unwrap();
        assert!((snr(&c2, &ch, 0, 0) / snr(&c, &ch, 0, 0) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn shannon_rates() {
        let c = cfg();
        assert_eq!(rb_rate(&c, 0.0), 0.0);
        assert!((rb_rate(&c, 1.0) - 180e3).abs() < 1e-9);
        assert!((rb_rate(&c, 3.0) - 360e3).abs() < 1e-9);
    }

    #[test]
    fn invalid_gains_rejected() {
        assert!(ChannelState::from_gains(1, 2, vec![1.0, 0.0], vec![(0, 0)]).is_err());
        assert!(ChannelState::from_gains(1, 2, vec![1.0, f64::NAN], vec![(0, 0)]).is_err());
    }

    #[test]
    fn repair_conflicting_column() {
        let rates = RateMatrix::from_rates(2, 1, vec![10.0, 10.0]).unwrap();
        let mut rng = seeding::rng(0);
        let mut seen = [0; 2];
        for _ in 0..200 {
            let mut a = AllocationMatrix::from_bits(2, 1, vec![true, true]).unwrap();
            repair(&mut a, &rates, &[100.0, 100.0], &mut rng);
            assert_eq!(a.column_sum(0), 1);
            seen[a.owner(0).unwrap()] += 1;
        }
        assert!(seen[0] > 50 && seen[1] > 50, "{seen:?}");
    }

    #[test]
    fn repair_fixed_point() {
        let rates = RateMatrix::from_rates(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let a = AllocationMatrix::from_owners(2, &[Some(0), None, Some(1)]);
        let mut b = a.clone();
        repair(&mut b, &rates, &[10.0, 10.0], &mut seeding::rng(3));
        assert_eq!(a, b);
    }

    /// Smallest-first greedy drop traced by hand: {100,200,300} kbps against 250 kbps
    /// ends with nothing assigned.
    #[test]
    fn repair_demand_overshoot() {
        let rates = RateMatrix::from_rates(1, 3, vec![100e3, 200e3, 300e3]).unwrap();
        let mut a = AllocationMatrix::from_bits(1, 3, vec![true; 3]).unwrap();
        repair(&mut a, &rates, &[250e3], &mut seeding::rng(0));
        assert_eq!(a.count_ones(), 0);
        // Exhaustive subset oracle: the result is one of the subsets within demand.
        let feasible: Vec<u32> = (0u32..8)
            .filter(|m| (0..3).filter(|i| m & (1 << i) != 0).map(|i| rates.rate(0, i)).sum::<f64>() <= 250e3)
            .collect();
        let got: u32 = (0..3).filter(|&i| a.get(0, i)).map(|i| 1 << i).sum();
        assert!(feasible.contains(&got));
    }

    #[test]
    fn repair_keeps_highest_rates() {
        let rates = RateMatrix::from_rates(1, 4, vec![100e3, 400e3, 50e3, 200e3]).unwrap();
        let mut a = AllocationMatrix::from_bits(1, 4, vec![true; 4]).unwrap();
        repair(&mut a, &rates, &[650e3], &mut seeding::rng(0));
        assert_eq!(a.bits(), &[false, true, false, true]);
    }

    fn two_user_instance(s_min: u8) -> Instance {
        let c = cfg().with_num_rbs(4).unwrap().with_num_users(2).unwrap().with_min_satisfaction(s_min).unwrap();
        let rates = RateMatrix::from_rates(2, 4, vec![300e3, 0.0, 0.0, 0.0, 0.0, 500e3, 0.0, 0.0]).unwrap();
        Instance::with_rates(c, rates, vec![context(400, 400), context(600, 400)]).unwrap()
    }

    #[test]
    fn evaluate_arithmetic() {
        // D = (400, 600) kbps, R = (300, 500) kbps: f1 = 100 kbps, both users at Δ = 100 of 400 → level 4.
        let inst = two_user_instance(4);
        let a = AllocationMatrix::from_owners(2, &[Some(0), Some(1), None, None]);
        let v = inst.objectives(&a, &ZotOracle).unwrap();
        assert!((v.f1 - 100e3).abs() < 1e-9);
        assert_eq!(v.f2, 4.0);
        assert_eq!(v.violation, 0.0);
    }

    #[test]
    fn evaluate_empty_and_exact() {
        let inst = two_user_instance(4);
        let empty = AllocationMatrix::zeros(2, 4);
        let v = inst.objectives(&empty, &ZotOracle).unwrap();
        assert!((v.f1 - 500e3).abs() < 1e-9);
        assert_eq!(inst.rate_report(&empty).user_rate, vec![0.0, 0.0]);
        assert_eq!(v.f2, 1.0);
        assert_eq!(v.violation, 6.0);

        let c = cfg().with_num_rbs(2).unwrap().with_num_users(2).unwrap();
        let rates = RateMatrix::from_rates(2, 2, vec![400e3, 1.0, 1.0, 600e3]).unwrap();
        let inst = Instance::with_rates(c, rates, vec![context(400, 100), context(600, 100)]).unwrap();
        let v = inst.objectives(&AllocationMatrix::from_owners(2, &[Some(0), Some(1)]), &ZotOracle).unwrap();
        assert_eq!(v.f1, 0.0);
        assert_eq!(v.f2, 5.0);
    }

    #[test]
    fn evaluate_rejects_unrepaired() {
        let inst = two_user_instance(1);
        let a = AllocationMatrix::from_bits(2, 4, vec![true, false, false, false, true, false, false, false]).unwrap();
        assert!(matches!(inst.objectives(&a, &ZotOracle), Err(NetError::Unrepaired(0))));
    }

    #[test]
    fn evaluator_counts() {
        let inst = two_user_instance(1);
        let ev = Evaluator::new(&inst, &ZotOracle);
        let a = AllocationMatrix::zeros(2, 4);
        for _ in 0..7 {
            ev.evaluate(&a).unwrap();
        }
        assert_eq!(ev.nfe(), 7);
    }

    fn random_instance(seed: u64) -> Instance {
        let c = cfg();
        let ch = draw_channel(&c, seed);
        let contexts = (0..4).map(|u| context(300 + 400 * u, 200)).collect();
        Instance::new(c, &ch, contexts).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn repaired_matrices_are_feasible(seed in 0u64..10_000, density in 0.0f64..1.0) {
            let inst = random_instance(seed % 17);
            let mut rng = seeding::rng(seed);
            let bits = (0..400).map(|_| rng.random_bool(density)).collect();
            let mut a = AllocationMatrix::from_bits(4, 100, bits).unwrap();
            inst.repair(&mut a, &mut rng);
            prop_assert!(a.first_conflict().is_none());
            let report = inst.rate_report(&a);
            for u in 0..4 {
                prop_assert!(report.user_delta[u] >= 0.0);
                prop_assert!(report.user_delta[u] <= report.demand[u]);
            }
            let power = a.count_ones() as f64 * inst.cfg.per_rb_power_w();
            prop_assert!(power <= inst.cfg.max_power_w() + 1e-12);
            // Incremental bookkeeping equals a from-scratch recomputation.
            let mut total = 0.0;
            for u in 0..4 {
                let r: f64 = (0..100).filter(|&n| a.get(u, n)).map(|n| inst.rates.rate(u, n)).sum();
                prop_assert_eq!(r, report.user_rate[u]);
                total += r;
            }
            prop_assert!((report.total_rate - total).abs() <= 1e-6);
            let v1 = inst.objectives(&a, &ZotOracle).unwrap();
            let v2 = inst.objectives(&a, &ZotOracle).unwrap();
            prop_assert_eq!(v1, v2);
        }

        #[test]
        fn adding_an_rb_never_hurts(seed in 0u64..5_000) {
            let inst = random_instance(seed % 11);
            let mut rng = seeding::rng(seed);
            let u = rng.random_range(0..4);
            let mut a = AllocationMatrix::zeros(4, 100);
            let free: Vec<usize> = (0..100).collect();
            let n = free[rng.random_range(0..100)];
            let before = inst.rate_report(&a);
            a.set(u, n, true);
            let after = inst.rate_report(&a);
            prop_assert!(after.user_rate[u] >= before.user_rate[u]);
            prop_assert!(after.user_delta[u] <= before.user_delta[u]);
        }
    }
}
