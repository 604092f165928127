//! Personalized downlink resource-block allocation.
//!
//! The crate couples a single-cell OFDMA rate model with a per-user
//! satisfaction model and searches the allocation space with multi-objective
//! evolutionary algorithms. A learned surrogate can stand in for the
//! satisfaction oracle, and the indicator and statistics modules score and
//! rank the resulting fronts.

pub mod netmodel;
pub mod satisfaction;
pub mod seeding;
pub mod surrogate;
pub mod emoo;
pub mod metrics;
pub mod stats;
