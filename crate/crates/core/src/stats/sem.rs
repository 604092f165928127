//! Sample-size selection from the standard error of the mean.

use serde::{Deserialize, Serialize};

use super::StatsError;

/// Candidate sample sizes `start, start + step, …, max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemGrid {
    pub start: usize,
    pub step: usize,
    pub max: usize,
}

impl Default for SemGrid {
    fn default() -> Self {
        SemGrid { start: 5, step: 5, max: 100 }
    }
}

impl SemGrid {
    pub fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        (self.start.max(2)..=self.max).step_by(self.step.max(1))
    }
}

/// `σ / √n`.
pub fn standard_error(std_dev: f64, n: usize) -> f64 {
    std_dev / (n as f64).sqrt()
}

/// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Standard error of the mean of `values`.
pub fn sem(values: &[f64]) -> f64 {
    standard_error(sample_std(values), values.len())
}

/// Smallest grid size `n` whose first-`n` prefix has SE_M strictly below `threshold`.
/// Samples are expected on a [0, 1] scale.
pub fn sample_size_by_sem(samples: &[f64], threshold: f64, grid: SemGrid) -> Result<usize, StatsError> {
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    for n in grid.sizes() {
        if n > samples.len() {
            break;
        }
        if sem(&samples[..n]) < threshold {
            return Ok(n);
        }
    }
    Err(StatsError::NotConverged { threshold, available: samples.len() })
}
