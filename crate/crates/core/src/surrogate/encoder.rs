use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::satisfaction::{LabeledSample, UserContext};

/// Categorical context fields, one-hot encoded in this order.
pub const CATEGORICAL_FIELDS: [&str; 8] = [
    "classified_day",
    "time_period",
    "location_name",
    "speed_range",
    "activity",
    "application",
    "service",
    "user_id",
];

/// Numeric features appended after the one-hot blocks.
pub const NUMERIC_FEATURES: [&str; 4] = ["demand_rate", "delta", "delta_ratio", "delta_positive"];

/// Shortfall-to-tolerance ratios above this are treated as equal.
pub const RATIO_CAP: f64 = 2.0;

const MAX_ACTIVE: usize = CATEGORICAL_FIELDS.len() + NUMERIC_FEATURES.len();

fn field(ctx: &UserContext, i: usize) -> std::borrow::Cow<'_, str> {
    match i {
        0 => ctx.classified_day.as_str().into(),
        1 => ctx.time_period.as_str().into(),
        2 => ctx.location_name.as_str().into(),
        3 => ctx.speed_range.as_str().into(),
        4 => ctx.activity.as_str().into(),
        5 => ctx.application.as_str().into(),
        6 => ctx.service.as_str().into(),
        _ => ctx.user_id.to_string().into(),
    }
}

fn raw_numeric(ctx: &UserContext, delta_kbps: f64) -> [f64; 3] {
    let delta = delta_kbps.max(0.0);
    let ratio = if delta <= 0.0 {
        0.0
    } else if ctx.max_delta == 0 {
        RATIO_CAP
    } else {
        (delta / ctx.max_delta as f64).min(RATIO_CAP)
    };
    [ctx.demand_rate as f64, delta, ratio]
}

/// A feature vector stored as its non-zero entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseInput {
    idx: [u32; MAX_ACTIVE],
    val: [f32; MAX_ACTIVE],
    len: usize,
}

impl SparseInput {
    /// Builds from explicit `(index, value)` pairs; at most 12 entries.
    pub fn from_pairs(pairs: &[(usize, f32)]) -> Self {
        assert!(pairs.len() <= MAX_ACTIVE, "too many active features");
        let mut out = Self { idx: [0; MAX_ACTIVE], val: [0.0; MAX_ACTIVE], len: 0 };
        for &(i, v) in pairs {
            out.push(i, v);
        }
        out
    }

    fn push(&mut self, i: usize, v: f32) {
        if v != 0.0 {
            self.idx[self.len] = i as u32;
            self.val[self.len] = v;
            self.len += 1;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f32)> + '_ {
        self.idx[..self.len].iter().zip(&self.val[..self.len]).map(|(i, v)| (*i as usize, *v))
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f32> {
        let mut out = vec![0.0; dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }
}

/// One-hot vocabularies and min-max bounds, frozen at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    vocabularies: Vec<Vec<String>>,
    #[serde(skip)]
    lookup: Vec<BTreeMap<String, usize>>,
    offsets: Vec<usize>,
    numeric_min: [f64; 3],
    numeric_max: [f64; 3],
    dim: usize,
}

impl FeatureEncoder {
    pub fn fit(samples: &[LabeledSample]) -> Self {
        let mut sets: Vec<BTreeSet<String>> = vec![BTreeSet::new(); CATEGORICAL_FIELDS.len()];
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for s in samples {
            for (i, set) in sets.iter_mut().enumerate() {
                let v = field(&s.context, i);
                if !set.contains(v.as_ref()) {
                    set.insert(v.into_owned());
                }
            }
            for (k, x) in raw_numeric(&s.context, s.delta as f64).into_iter().enumerate() {
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
        if samples.is_empty() {
            lo = [0.0; 3];
            hi = [0.0; 3];
        }
        let vocabularies = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        Self::from_parts(vocabularies, lo, hi)
    }

    fn from_parts(vocabularies: Vec<Vec<String>>, numeric_min: [f64; 3], numeric_max: [f64; 3]) -> Self {
        let mut offsets = Vec::with_capacity(vocabularies.len());
        let mut dim = 0;
        for v in &vocabularies {
            offsets.push(dim);
            dim += v.len();
        }
        dim += NUMERIC_FEATURES.len();
        let mut enc = Self { vocabularies, lookup: Vec::new(), offsets, numeric_min, numeric_max, dim };
        enc.rebuild_lookup();
        enc
    }

    /// Restores the string index after deserialization.
    pub(crate) fn rebuild_lookup(&mut self) {
        self.lookup = self
            .vocabularies
            .iter()
            .map(|v| v.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocabulary(&self, field_index: usize) -> &[String] {
        &self.vocabularies[field_index]
    }

    pub fn numeric_bounds(&self) -> ([f64; 3], [f64; 3]) {
        (self.numeric_min, self.numeric_max)
    }

    fn scale(&self, k: usize, x: f64) -> f64 {
        let span = self.numeric_max[k] - self.numeric_min[k];
        if span > 0.0 {
            (x - self.numeric_min[k]) / span
        } else {
            0.0
        }
    }

    /// Unseen category values leave their block all-zero.
    pub fn encode(&self, ctx: &UserContext, delta_kbps: f64) -> SparseInput {
        let mut out = SparseInput { idx: [0; MAX_ACTIVE], val: [0.0; MAX_ACTIVE], len: 0 };
        for (i, table) in self.lookup.iter().enumerate() {
            if let Some(&j) = table.get(field(ctx, i).as_ref()) {
                out.push(self.offsets[i] + j, 1.0);
            }
        }
        let base = self.dim - NUMERIC_FEATURES.len();
        for (k, x) in raw_numeric(ctx, delta_kbps).into_iter().enumerate() {
            out.push(base + k, self.scale(k, x) as f32);
        }
        out.push(base + 3, if delta_kbps > 0.0 { 1.0 } else { 0.0 });
        out
    }

    pub fn encode_dense(&self, ctx: &UserContext, delta_kbps: f64) -> Vec<f32> {
        self.encode(ctx, delta_kbps).to_dense(self.dim)
    }
}
