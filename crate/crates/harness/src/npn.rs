//! Non-personalized baseline: serve as much demanded rate as the RBs allow.

use persnet::netmodel::{AllocationMatrix, Instance};
use persnet::seeding;

/// Greedy max-rate allocation.
///
/// RBs are visited in descending order of their best per-user rate (ties by
/// index); each goes to the unmet user with the highest rate on it. The result
/// is then demand-repaired. No randomness is involved: the allocation never has
/// conflicting columns.
pub fn npn_allocate(inst: &Instance) -> AllocationMatrix {
    let (users, rbs) = (inst.users(), inst.rbs());
    let best = |n: usize| (0..users).map(|u| inst.rates.rate(u, n)).fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..rbs).collect();
    order.sort_by(|&a, &b| best(b).total_cmp(&best(a)).then(a.cmp(&b)));
    let mut given = vec![0.0; users];
    let mut owners = vec![None; rbs];
    for n in order {
        let pick = (0..users)
            .filter(|&u| given[u] < inst.demand_bps[u])
            .max_by(|&a, &b| inst.rates.rate(a, n).total_cmp(&inst.rates.rate(b, n)).then(b.cmp(&a)));
        if let Some(u) = pick {
            owners[n] = Some(u);
            given[u] += inst.rates.rate(u, n);
        }
    }
    let mut alloc = AllocationMatrix::from_owners(users, &owners);
    inst.repair(&mut alloc, &mut seeding::rng(0));
    alloc
}

/// Total provided rate of an allocation, bit/s.
pub fn total_rate(inst: &Instance, alloc: &AllocationMatrix) -> f64 {
    inst.rate_report(alloc).total_rate
}

#[cfg(test)]
mod tests {
    use super::*;
    use persnet::netmodel::{NetworkConfig, RateMatrix};
    use persnet::satisfaction::UserContext;

    fn inst(rates_kbps: &[f64], users: usize, demand: &[u32]) -> Instance {
        let rbs = rates_kbps.len() / users;
        let cfg = NetworkConfig::default().with_num_rbs(rbs).and_then(|c| c.with_num_users(users)).unwrap();
        let rates = RateMatrix::from_rates(users, rbs, rates_kbps.iter().map(|r| r * 1e3).collect()).unwrap();
        let ctx = demand.iter().enumerate().map(|(u, &d)| UserContext::synthetic(u as u32, d, d / 2)).collect();
        Instance::with_rates(cfg, rates, ctx).unwrap()
    }

    #[test]
    fn single_hungry_user_takes_everything() {
        let i = inst(&[100.0, 200.0, 300.0], 1, &[10_000]);
        assert_eq!(npn_allocate(&i).count_ones(), 3);
    }

    #[test]
    fn zero_demand_gets_nothing() {
        let i = inst(&[100.0, 200.0, 300.0, 50.0, 60.0, 70.0], 2, &[0, 0]);
        assert_eq!(npn_allocate(&i).count_ones(), 0);
    }

    #[test]
    fn deterministic_and_within_demand() {
        let i = inst(&[400.0, 300.0, 100.0, 80.0, 350.0, 100.0, 250.0, 90.0], 2, &[700, 400]);
        let a = npn_allocate(&i);
        assert_eq!(a, npn_allocate(&i));
        let r = i.rate_report(&a);
        assert!(r.user_delta.iter().all(|d| *d >= 0.0));
    }
}
