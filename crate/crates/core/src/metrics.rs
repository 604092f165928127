//! Front-quality indicators (NGR, GD, IGD, SP, HV) in a normalized 2-D
//! maximization space.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::ObjectiveVector;
use crate::satisfaction::{MAX_LEVEL, MIN_LEVEL};

/// A point in normalized objective space, `[f1, f2]`.
pub type Point = [f64; 2];

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("{0} needs a non-empty {1}")]
    Empty(&'static str, &'static str),
    #[error("spacing needs at least two points, got {0}")]
    TooFewPoints(usize),
}

/// Affine map of both objectives to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub f1_min: f64,
    pub f1_max: f64,
    pub f2_min: f64,
    pub f2_max: f64,
}

impl Normalization {
    /// f1 bounds from the reference set, f2 bounds from the satisfaction scale.
    /// A degenerate f1 range falls back to `[0, max]` (or `[0, 1]`).
    pub fn from_reference(reference: &[ObjectiveVector]) -> Self {
        let lo = reference.iter().map(|o| o.f1).fold(f64::INFINITY, f64::min);
        let hi = reference.iter().map(|o| o.f1).fold(f64::NEG_INFINITY, f64::max);
        let (f1_min, f1_max) = if hi > lo {
            (lo, hi)
        } else if hi.is_finite() && hi > 0.0 {
            (0.0, hi)
        } else {
            (0.0, 1.0)
        };
        Self { f1_min, f1_max, f2_min: MIN_LEVEL as f64, f2_max: MAX_LEVEL as f64 }
    }

    pub fn apply(&self, o: &ObjectiveVector) -> Point {
        [(o.f1 - self.f1_min) / (self.f1_max - self.f1_min), (o.f2 - self.f2_min) / (self.f2_max - self.f2_min)]
    }

    pub fn apply_all(&self, set: &[ObjectiveVector]) -> Vec<Point> {
        set.iter().map(|o| self.apply(o)).collect()
    }
}

fn euclid(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn manhattan(a: &Point, b: &Point) -> f64 {
    (a[0] - b[0]).abs() + (a[1] - b[1]).abs()
}

fn nearest(p: &Point, set: &[Point]) -> f64 {
    set.iter().map(|q| euclid(p, q)).fold(f64::INFINITY, f64::min)
}

/// Size ratio `|S| / |R|`.
pub fn ngr(s_len: usize, r_len: usize) -> Result<f64, MetricError> {
    if r_len == 0 {
        return Err(MetricError::Empty("NGR", "reference set"));
    }
    Ok(s_len as f64 / r_len as f64)
}

/// Generational distance: `sqrt(Σ d²) / |S|`, `d` from each member of S to its nearest in R.
pub fn gd(s: &[Point], r: &[Point]) -> Result<f64, MetricError> {
    if s.is_empty() {
        return Err(MetricError::Empty("GD", "front"));
    }
    if r.is_empty() {
        return Err(MetricError::Empty("GD", "reference set"));
    }
    Ok(s.iter().map(|p| nearest(p, r).powi(2)).sum::<f64>().sqrt() / s.len() as f64)
}

/// Inverted generational distance: `sqrt(Σ d²) / |R|`, `d` from each member of R to its nearest in S.
pub fn igd(s: &[Point], r: &[Point]) -> Result<f64, MetricError> {
    if s.is_empty() {
        return Err(MetricError::Empty("IGD", "front"));
    }
    if r.is_empty() {
        return Err(MetricError::Empty("IGD", "reference set"));
    }
    Ok(r.iter().map(|p| nearest(p, s).powi(2)).sum::<f64>().sqrt() / r.len() as f64)
}

/// Spacing: sample standard deviation of Manhattan nearest-neighbour distances.
pub fn spacing(s: &[Point]) -> Result<f64, MetricError> {
    if s.len() < 2 {
        return Err(MetricError::TooFewPoints(s.len()));
    }
    let d: Vec<f64> = s
        .iter()
        .enumerate()
        .map(|(i, p)| {
            s.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, q)| manhattan(p, q)).fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    Ok((d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64).sqrt())
}

/// Area dominated by `s` above `reference`, plus the number of members that
/// fail to weakly dominate the reference point and were left out.
pub fn hypervolume_detailed(s: &[Point], reference: Point) -> (f64, usize) {
    let mut pts: Vec<Point> = s.iter().copied().filter(|p| p[0] >= reference[0] && p[1] >= reference[1]).collect();
    let clipped = s.len() - pts.len();
    pts.sort_by(|a, b| b[0].total_cmp(&a[0]).then(b[1].total_cmp(&a[1])));
    let mut area = 0.0;
    let mut top = reference[1];
    for p in pts {
        if p[1] > top {
            area += (p[0] - reference[0]) * (p[1] - top);
            top = p[1];
        }
    }
    (area, clipped)
}

pub fn hypervolume(s: &[Point], reference: Point) -> f64 {
    hypervolume_detailed(s, reference).0
}

/// All five indicators of a front against a reference set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub hv: f64,
    pub gd: f64,
    pub igd: f64,
    /// Zero when the front has fewer than two members.
    pub sp: f64,
    pub ngr: f64,
    pub reference_point: Point,
    pub normalization: Normalization,
    pub clipped: usize,
}

pub const HV_REFERENCE_POINT: Point = [0.0, 0.0];

/// Indicators of `front` against `reference`, both normalized by the reference set.
pub fn evaluate_front(front: &[ObjectiveVector], reference: &[ObjectiveVector]) -> Result<MetricReport, MetricError> {
    let norm = Normalization::from_reference(reference);
    evaluate_front_with(front, reference, norm)
}

pub fn evaluate_front_with(
    front: &[ObjectiveVector],
    reference: &[ObjectiveVector],
    norm: Normalization,
) -> Result<MetricReport, MetricError> {
    let s = norm.apply_all(front);
    let r = norm.apply_all(reference);
    let (hv, clipped) = hypervolume_detailed(&s, HV_REFERENCE_POINT);
    Ok(MetricReport {
        hv,
        gd: gd(&s, &r)?,
        igd: igd(&s, &r)?,
        sp: if s.len() < 2 { 0.0 } else { spacing(&s)? },
        ngr: ngr(s.len(), r.len())?,
        reference_point: HV_REFERENCE_POINT,
        normalization: norm,
        clipped,
    })
}
