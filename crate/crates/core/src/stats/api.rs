//! Composite performance indicator over per-metric ranks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Magnitude of every metric weight.
pub const METRIC_WEIGHT: f64 = 0.2;

/// Friedman average ranks of one algorithm on each indicator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricRanks {
    pub hv: f64,
    pub gd: f64,
    pub igd: f64,
    pub sp: f64,
    pub ngr: f64,
}

/// Phase angles per indicator; HV and SP count positively, GD and IGD negatively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phases {
    pub hv: f64,
    pub gd: f64,
    pub igd: f64,
    pub sp: f64,
    pub ngr: f64,
    pub beta: u8,
}

/// β is 1 when the mean generation ratio is at most 1, which flips the NGR phase to 0.
pub fn phases(ngr_mean: f64) -> Phases {
    let beta = u8::from(ngr_mean <= 1.0);
    Phases { hv: 0.0, gd: PI, igd: PI, sp: 0.0, ngr: (1.0 - f64::from(beta)) * PI, beta }
}

/// `Σ |w|·cos(θ)·rank`. The cosines are rounded to ±1 so the score is exact in the ranks.
pub fn api_score(ranks: &MetricRanks, ngr_mean: f64) -> f64 {
    let th = phases(ngr_mean);
    let sign = |theta: f64| theta.cos().round();
    METRIC_WEIGHT
        * (sign(th.hv) * ranks.hv
            + sign(th.gd) * ranks.gd
            + sign(th.igd) * ranks.igd
            + sign(th.sp) * ranks.sp
            + sign(th.ngr) * ranks.ngr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all(v: f64) -> MetricRanks {
        MetricRanks { hv: v, gd: v, igd: v, sp: v, ngr: v }
    }

    #[test]
    fn substitution_examples() {
        assert!((api_score(&all(2.0), 2.0) - (-0.4)).abs() < 1e-15);
        assert_eq!(api_score(&all(0.0), 2.0), 0.0);
        assert!((api_score(&all(2.0), 0.5) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn linear_in_each_rank() {
        let base = MetricRanks { hv: 2.5, gd: 1.0, igd: 3.5, sp: 4.0, ngr: 2.0 };
        let a = api_score(&base, 1.7);
        let cases = [
            (MetricRanks { hv: base.hv + 1.0, ..base }, 0.2),
            (MetricRanks { sp: base.sp + 1.0, ..base }, 0.2),
            (MetricRanks { gd: base.gd + 1.0, ..base }, -0.2),
            (MetricRanks { igd: base.igd + 1.0, ..base }, -0.2),
            (MetricRanks { ngr: base.ngr + 1.0, ..base }, -0.2),
        ];
        for (r, delta) in cases {
            assert!((api_score(&r, 1.7) - a - delta).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_switch() {
        assert_eq!(phases(1.0).beta, 1);
        assert_eq!(phases(1.0).ngr, 0.0);
        assert_eq!(phases(1.0001).beta, 0);
    }
}
