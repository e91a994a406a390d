use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::{run_trials, GameSequence, ProbEstimate};
use crate::hypothesis::{is_distinguishing, DistinguishingTuple, TupleSummary};
use crate::learners::LearnerFactory;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Concentrated on `f0(x_dif)`.
    Standard,
    /// Concentrated on `f1(x_dif)`; the roles of `f0` and `f1` swap.
    Swapped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub tuple: TupleSummary,
    pub horizon: usize,
    pub n_trials: usize,
    pub seed: u64,
    /// `Pr[∃t: f̂_t(x_dif) ≠ f0(x_dif)]` on the dummy input.
    pub beta_hat: ProbEstimate,
    /// `Pr[∃t: f̂_t(x_dif) ≠ f1(x_dif)]`.
    pub beta_hat_swapped: ProbEstimate,
    /// Orientation with the smaller estimate.
    pub orientation: Orientation,
    /// `Pr[f̂_t(x_dif) = 1]` for `t = 1..=T`.
    pub marginals: Vec<ProbEstimate>,
}

impl ConcentrationReport {
    pub fn best(&self) -> ProbEstimate {
        match self.orientation {
            Orientation::Standard => self.beta_hat,
            Orientation::Swapped => self.beta_hat_swapped,
        }
    }
}

/// Runs the learner on `T` copies of `(x_eq, f0(x_eq))` and measures how
/// often it ever leaves `f0(x_dif)` at `x_dif`.
pub fn estimate_concentration(
    factory: &dyn LearnerFactory,
    tuple: &DistinguishingTuple,
    horizon: usize,
    n_trials: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if !is_distinguishing(&tuple.f0, &tuple.f1, tuple.x_eq, tuple.x_dif) {
        return Err(invalid("tuple is not distinguishing"));
    }
    if n_trials < 100 {
        return Err(invalid(format!("n_trials must be at least 100, got {n_trials}")));
    }
    if horizon == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    let seq = GameSequence::repeated(tuple.f0.clone(), tuple.x_eq, horizon)?;
    let x = tuple.x_dif;
    let rows = run_trials(factory, &seq, n_trials, seed, |tr| {
        (1..=horizon).map(|t| tr.prediction(t, x)).collect::<Vec<bool>>()
    })?;
    let base = tuple.f0.eval(x);
    let ever = |v: bool| rows.iter().filter(|r| r.contains(&v)).count();
    let beta_hat = ProbEstimate::from_counts(ever(!base), n_trials);
    let beta_hat_swapped = ProbEstimate::from_counts(ever(base), n_trials);
    let marginals = (0..horizon)
        .map(|t| ProbEstimate::from_counts(rows.iter().filter(|r| r[t]).count(), n_trials))
        .collect();
    let orientation = if beta_hat_swapped.p_hat < beta_hat.p_hat {
        Orientation::Swapped
    } else {
        Orientation::Standard
    };
    Ok(ConcentrationReport {
        tuple: tuple.summary(),
        horizon,
        n_trials,
        seed,
        beta_hat,
        beta_hat_swapped,
        orientation,
        marginals,
    })
}
