//! Distribution helpers: studentized range with infinite degrees of freedom
//! and exact permutation distributions of rank sums.

use statrs::distribution::{ContinuousCDF, Normal};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// `P(Q ≤ q)` for the range of `k` independent standard normals.
pub fn studentized_range_cdf(q: f64, k: usize) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let n = std_normal();
    let pdf = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    // Composite Simpson over a range that carries all but ~1e-16 of the mass.
    let lo = -9.0;
    let hi = 9.0 + q;
    let steps = 4000;
    let h = (hi - lo) / steps as f64;
    let f = |z: f64| pdf(z) * (n.cdf(z) - n.cdf(z - q)).max(0.0).powi(k as i32 - 1);
    let mut sum = f(lo) + f(hi);
    for i in 1..steps {
        let z = lo + i as f64 * h;
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(z);
    }
    (k as f64 * sum * h / 3.0).clamp(0.0, 1.0)
}

/// Upper tail `P(Q ≥ q)`.
pub fn studentized_range_sf(q: f64, k: usize) -> f64 {
    1.0 - studentized_range_cdf(q, k)
}

/// Null distribution of the signed-rank statistic for the given (doubled, integer)
/// ranks: `counts[s]` = number of sign patterns whose positive doubled ranks sum to `s`.
pub fn signed_rank_counts(doubled_ranks: &[usize]) -> Vec<f64> {
    let total: usize = doubled_ranks.iter().sum();
    let mut counts = vec![0.0; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in doubled_ranks {
        for s in (0..=reach).rev() {
            if counts[s] > 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

/// Null distribution of the rank sum of a group of size `m` drawn without
/// replacement from `doubled_ranks`: `counts[s]` = number of subsets summing to `s`.
pub fn rank_sum_counts(doubled_ranks: &[usize], m: usize) -> Vec<f64> {
    let total: usize = doubled_ranks.iter().sum();
    // table[j][s]: subsets of size j with sum s.
    let mut table = vec![vec![0.0; total + 1]; m + 1];
    table[0][0] = 1.0;
    let mut reach = 0;
    for (seen, &r) in doubled_ranks.iter().enumerate() {
        for j in (1..=m.min(seen + 1)).rev() {
            let (lower, upper) = table.split_at_mut(j);
            let src = &lower[j - 1];
            let dst = &mut upper[0];
            for s in (0..=reach).rev() {
                if src[s] > 0.0 {
                    dst[s + r] += src[s];
                }
            }
        }
        reach += r;
    }
    table.swap_remove(m)
}

/// Two-sided p-value `min(1, 2·min(P(T ≤ t), P(T ≥ t)))` from integer-indexed counts.
pub fn two_sided_from_counts(counts: &[f64], t: usize) -> f64 {
    let total: f64 = counts.iter().sum();
    let lower: f64 = counts[..=t].iter().sum();
    let upper: f64 = counts[t..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

/// Two-sided normal-tail p-value of a standardized statistic.
pub fn two_sided_normal(z: f64) -> f64 {
    (2.0 * (1.0 - std_normal().cdf(z.abs()))).min(1.0)
}
