mod common;

use common::hand_instance;
use persnet_harness::npn::{npn_allocate, total_rate};
use proptest::prelude::*;

/// Maximum total rate within demand over all 3^rbs owner assignments of two users.
fn brute_force_max(rates_kbps: &[f64], demand_kbps: &[u32]) -> f64 {
    let rbs = rates_kbps.len() / 2;
    let mut best = 0.0f64;
    for code in 0..3usize.pow(rbs as u32) {
        let mut got = [0.0; 2];
        let mut c = code;
        for n in 0..rbs {
            let owner = c % 3;
            c /= 3;
            if owner > 0 {
                got[owner - 1] += rates_kbps[(owner - 1) * rbs + n];
            }
        }
        if got[0] <= demand_kbps[0] as f64 && got[1] <= demand_kbps[1] as f64 {
            best = best.max(got[0] + got[1]);
        }
    }
    best
}

// Frozen values from tests/oracles/npn_oracle.py.
#[test]
fn matches_enumeration_on_hand_set_cases() {
    let cases: [(&[f64], [u32; 2], f64); 3] = [
        (&[400.0, 300.0, 100.0, 80.0, 350.0, 100.0, 250.0, 90.0], [700, 400], 1040.0),
        (&[300.0, 200.0, 150.0, 100.0, 250.0, 180.0, 120.0, 60.0], [5000, 5000], 750.0),
        (&[500.0, 100.0, 400.0, 50.0, 100.0, 450.0, 120.0, 300.0], [900, 750], 1650.0),
    ];
    for (rates, demand, expected) in cases {
        assert_eq!(brute_force_max(rates, &demand), expected);
        let inst = hand_instance(rates, 2, &demand);
        let got = total_rate(&inst, &npn_allocate(&inst)) / 1e3;
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }
}

#[test]
fn single_user_over_capacity_takes_all_rbs() {
    let inst = hand_instance(&[120.0, 80.0, 300.0, 10.0], 1, &[100_000]);
    let a = npn_allocate(&inst);
    assert_eq!(a.count_ones(), 4);
}

#[test]
fn zero_demand_gives_empty_allocation() {
    let inst = hand_instance(&[120.0, 80.0, 300.0, 10.0, 1.0, 2.0, 3.0, 4.0], 2, &[0, 0]);
    assert_eq!(npn_allocate(&inst).count_ones(), 0);
}

proptest! {
    #[test]
    fn within_demand_and_never_above_optimum(
        rates in prop::collection::vec(10u32..600, 8),
        d0 in 0u32..1500,
        d1 in 0u32..1500,
    ) {
        let rates: Vec<f64> = rates.into_iter().map(f64::from).collect();
        let inst = hand_instance(&rates, 2, &[d0, d1]);
        let a = npn_allocate(&inst);
        prop_assert_eq!(&a, &npn_allocate(&inst));
        let rep = inst.rate_report(&a);
        prop_assert!(rep.user_delta.iter().all(|d| *d >= 0.0));
        prop_assert!(rep.total_rate / 1e3 <= brute_force_max(&rates, &[d0, d1]) + 1e-9);
    }
}
