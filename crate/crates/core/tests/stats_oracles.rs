//! Cross-checks of the comparison statistics against independent references:
//! brute-force permutation enumeration and values frozen from `oracles/stats_oracle.py`.

use persnet::stats::{
    average_ranks, friedman, mann_whitney, posthoc, wilcoxon_signed_rank, PosthocTest, StatsError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-6;

fn two_sided(stats: &[f64], observed: f64) -> f64 {
    let eps = 1e-9;
    let total = stats.len() as f64;
    let lower = stats.iter().filter(|s| **s <= observed + eps).count() as f64;
    let upper = stats.iter().filter(|s| **s >= observed - eps).count() as f64;
    (2.0 * lower.min(upper) / total).min(1.0)
}

fn brute_wilcoxon(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|v| *v != 0.0).collect();
    if d.is_empty() {
        return 1.0;
    }
    let ranks = average_ranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let observed: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let all: Vec<f64> = (0u32..1 << d.len())
        .map(|mask| ranks.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, r)| r).sum())
        .collect();
    two_sided(&all, observed)
}

fn brute_rank_sum(x: &[f64], y: &[f64]) -> f64 {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = average_ranks(&pooled);
    let observed: f64 = ranks[..x.len()].iter().sum();
    let all: Vec<f64> = (0u32..1 << pooled.len())
        .filter(|mask| mask.count_ones() as usize == x.len())
        .map(|mask| ranks.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, r)| r).sum())
        .collect();
    two_sided(&all, observed)
}

fn tied_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| f64::from(rng.random_range(0..6u8)) * 0.5).collect()
}

#[test]
fn wilcoxon_matches_sign_flip_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..60 {
        let n = 1 + case % 12;
        let x = tied_sample(&mut rng, n);
        let y = tied_sample(&mut rng, n);
        let (fast, slow) = (wilcoxon_signed_rank(&x, &y), brute_wilcoxon(&x, &y));
        assert!((fast - slow).abs() < TOL, "n={n} x={x:?} y={y:?}: {fast} vs {slow}");
    }
}

#[test]
fn mann_whitney_matches_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..60 {
        let m = 1 + case % 6;
        let n = 1 + (case / 6) % 6;
        let x = tied_sample(&mut rng, m);
        let y = tied_sample(&mut rng, n);
        let (fast, slow) = (mann_whitney(&x, &y), brute_rank_sum(&x, &y));
        assert!((fast - slow).abs() < TOL, "x={x:?} y={y:?}: {fast} vs {slow}");
    }
}

// Frozen from oracles/stats_oracle.py (scipy studentized_range and Student t).
const ORDERED_NEMENYI: [f64; 3] = [0.06525980383058527, 2.3064402435379883e-05, 0.06525980383058527];
const ORDERED_CONOVER: [f64; 3] = [0.0, 0.0, 0.0];
const MIXED_NEMENYI: [f64; 6] = [
    0.8659775649526871,
    0.3527442277079712,
    0.07322205449086783,
    0.07322205449086783,
    0.3527442277079712,
    0.00027845604257381584,
];
const MIXED_CONOVER: [f64; 6] = [
    0.1608153123057822,
    0.005561045763075521,
    0.00017753911566639584,
    0.00017753911566639584,
    0.005561045763075521,
    1.7378772095213656e-07,
];
const SMALL_NEMENYI: [f64; 3] = [0.13940464288897025, 0.3289712590583226, 0.8833885151379528];
const SMALL_CONOVER: [f64; 3] = [0.053073441743272026, 0.12739077381951006, 0.5863014922448692];

fn ordered() -> Vec<Vec<f64>> {
    (0..10).map(|i| vec![1.0 + f64::from(i) * 0.01, 2.0, 3.0 + f64::from(i)]).collect()
}

fn mixed() -> Vec<Vec<f64>> {
    vec![
        vec![0.61, 0.58, 0.70, 0.52],
        vec![0.55, 0.57, 0.69, 0.50],
        vec![0.63, 0.60, 0.60, 0.49],
        vec![0.59, 0.62, 0.71, 0.55],
        vec![0.66, 0.59, 0.68, 0.51],
        vec![0.58, 0.58, 0.73, 0.53],
        vec![0.62, 0.61, 0.67, 0.62],
        vec![0.60, 0.56, 0.72, 0.48],
    ]
}

fn small() -> Vec<Vec<f64>> {
    vec![
        vec![3.0, 1.0, 2.0],
        vec![2.0, 1.0, 3.0],
        vec![3.0, 2.0, 1.0],
        vec![3.0, 1.0, 2.0],
        vec![2.5, 2.5, 1.0],
    ]
}

fn check(matrix: &[Vec<f64>], test: PosthocTest, expected: &[f64]) {
    let table = posthoc(matrix, test, 0.05).unwrap();
    assert_eq!(table.pairs.len(), expected.len());
    for (pair, want) in table.pairs.iter().zip(expected) {
        assert!(
            (pair.p_value - want).abs() < TOL,
            "{test:?} ({}, {}): {} vs {want}",
            pair.a,
            pair.b,
            pair.p_value
        );
    }
}

#[test]
fn nemenyi_matches_reference() {
    check(&ordered(), PosthocTest::Nemenyi, &ORDERED_NEMENYI);
    check(&mixed(), PosthocTest::Nemenyi, &MIXED_NEMENYI);
    check(&small(), PosthocTest::Nemenyi, &SMALL_NEMENYI);
}

#[test]
fn conover_matches_reference() {
    check(&ordered(), PosthocTest::Conover, &ORDERED_CONOVER);
    check(&mixed(), PosthocTest::Conover, &MIXED_CONOVER);
    check(&small(), PosthocTest::Conover, &SMALL_CONOVER);
}

#[test]
fn friedman_reference_values() {
    let r = friedman(&ordered()).unwrap();
    assert!((r.statistic - 20.0).abs() < 1e-9);
    assert!((r.p_value - 4.539992976248486e-05).abs() < 1e-9);
    let r = friedman(&mixed()).unwrap();
    assert!((r.statistic - 17.1375).abs() < 1e-9);
    assert!((r.p_value - 0.0006621811935653366).abs() < 1e-9);
}

fn binomial_two_sided(wins: u32, n: u32) -> f64 {
    let pmf = |k: u32| -> f64 {
        let mut c = 1.0;
        for i in 0..k {
            c = c * f64::from(n - i) / f64::from(i + 1);
        }
        c / 2f64.powi(n as i32)
    };
    let lower: f64 = (0..=wins).map(pmf).sum();
    let upper: f64 = (wins..=n).map(pmf).sum();
    (2.0 * lower.min(upper)).min(1.0)
}

#[test]
fn two_algorithm_friedman_agrees_with_sign_test() {
    for wins in 0..=10u32 {
        let m: Vec<Vec<f64>> = (0..10u32).map(|i| if i < wins { vec![2.0, 1.0] } else { vec![1.0, 2.0] }).collect();
        let r = friedman(&m).unwrap();
        let w = f64::from(wins);
        assert!((r.statistic - (2.0 * w - 10.0).powi(2) / 10.0).abs() < 1e-9);
        let exact = binomial_two_sided(wins, 10);
        assert_eq!(r.p_value < 0.05, exact < 0.05, "wins={wins}: {} vs {exact}", r.p_value);
    }
}

#[test]
fn all_tied_pair_under_wilcoxon() {
    let x = [0.4; 9];
    assert_eq!(wilcoxon_signed_rank(&x, &x), 1.0);
    assert!(matches!(friedman(&[vec![f64::NAN, 1.0], vec![1.0, 2.0]]), Err(StatsError::NonFinite)));
}
