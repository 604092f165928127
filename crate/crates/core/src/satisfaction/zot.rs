use super::{SatisfactionModel, UserContext};

/// Upper bounds of the shortfall ratio `delta / max_delta` for levels 4, 3 and 2.
/// Anything above the last bound is level 1; no shortfall at all is level 5.
pub const ZOT_THRESHOLDS: [f64; 3] = [0.25, 0.5, 0.75];

/// Zone-of-Tolerance level for a shortfall `delta` given tolerance `max_delta` (same units).
pub fn zot_level_for(max_delta: f64, delta: f64) -> u8 {
    if delta <= 0.0 {
        return 5;
    }
    if max_delta <= 0.0 {
        return 1;
    }
    let ratio = delta / max_delta;
    match ZOT_THRESHOLDS.iter().position(|&t| ratio <= t) {
        Some(i) => 4 - i as u8,
        None => 1,
    }
}

/// Ground-truth satisfaction of `ctx` when its demand is missed by `delta_kbps`.
pub fn zot_level(ctx: &UserContext, delta_kbps: f64) -> u8 {
    zot_level_for(ctx.max_delta as f64, delta_kbps)
}

/// The ground-truth behavior as a [`SatisfactionModel`]; stands in for direct user feedback.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZotOracle;

impl SatisfactionModel for ZotOracle {
    fn level(&self, ctx: &UserContext, delta_kbps: f64) -> u8 {
        zot_level(ctx, delta_kbps)
    }
}
