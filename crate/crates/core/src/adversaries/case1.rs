use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::GameSequence;
use crate::hypothesis::DistinguishingTuple;

/// `k` copies of `x_dif` followed by `x_eq` up to `T`; target `f1`.
pub fn case1_sequence(tuple: &DistinguishingTuple, k: usize, horizon: usize) -> Result<GameSequence> {
    if k > horizon {
        return Err(invalid(format!("k = {k} exceeds horizon {horizon}")));
    }
    let points = (0..horizon).map(|t| if t < k { tuple.x_dif } else { tuple.x_eq }).collect();
    GameSequence::new(tuple.f1.clone(), points)
}

/// `⌈ln(1/β) / (8 ε₀)⌉` inserted points.
pub fn case1_k(beta: f64, epsilon: f64) -> Result<usize> {
    if !(beta > 0.0 && beta < 1.0) || !(epsilon > 0.0) {
        return Err(invalid("case I needs beta in (0, 1) and epsilon > 0"));
    }
    Ok(((1.0 / beta).ln() / (8.0 * epsilon)).ceil() as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupPrivacyBound {
    /// `β e^{kε} + δ (e^{kε} - 1) / (e^ε - 1)`
    pub exact: f64,
    /// `(kδ + β) e^{kε}`
    pub relaxed: f64,
}

/// Bound on an event's probability after `k` neighbouring changes, starting
/// from probability `β`, for an (ε, δ)-DP learner.
pub fn group_privacy_bound(beta: f64, delta: f64, epsilon: f64, k: usize) -> Result<GroupPrivacyBound> {
    if beta < 0.0 || delta < 0.0 || !(epsilon > 0.0) {
        return Err(invalid("group privacy bound needs beta, delta >= 0 and epsilon > 0"));
    }
    let grow = (k as f64 * epsilon).exp();
    Ok(GroupPrivacyBound {
        exact: beta * grow + delta * (grow - 1.0) / epsilon.exp_m1(),
        relaxed: (k as f64 * delta + beta) * grow,
    })
}
