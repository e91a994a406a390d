//! Simulation lab for differentially private online learning in the
//! realizable, oblivious mistake-bound model.
//!
//! - [`hypothesis`]: finite classes, Littlestone dimension, distinguishing tuples
//! - [`game`]: the online game, transcripts and Monte Carlo event estimates
//! - [`learners`]: SOA, Name & Shame, the counter learner, uniform firing
//! - [`counters`]: continual counters (naive, binary tree, noise-free)
//! - [`adversaries`]: lower-bound sequence constructions
//! - [`auditors`]: concentration, witness search and privacy audits

pub mod adversaries;
pub mod auditors;
pub mod counters;
pub mod error;
pub mod game;
pub mod hypothesis;
pub mod learners;
mod par;
pub mod rng;

pub use error::{Error, Result};
