use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Learner, LearnerFactory};
use crate::counters::{zero_stream_peak_quantile, CounterSpec, CounterState};
use crate::error::{invalid, Error, Result};
use crate::game::LabeledPoint;
use crate::hypothesis::{Hypothesis, HypothesisClass};
use crate::rng::SimRng;

/// How a total privacy budget `ε` maps to the per-hypothesis counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterBudget {
    /// Every counter runs at `ε`; by advanced composition the learner is
    /// about `ε √(3N ln(1/δ))`-DP.
    #[default]
    PerCounter,
    /// Every counter runs at `ε / √(3N ln(1/δ))`, so the whole learner is
    /// about `ε`-DP with slack `δ`.
    Total { delta: f64 },
}

impl CounterBudget {
    pub fn per_counter_epsilon(&self, epsilon: f64, n_counters: usize) -> Result<f64> {
        match *self {
            CounterBudget::PerCounter => Ok(epsilon),
            CounterBudget::Total { delta } => {
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(invalid(format!("budget delta must lie in (0, 1), got {delta}")));
                }
                Ok(epsilon / composition_factor(n_counters, delta))
            }
        }
    }

    /// Overall `ε′` of the learner given per-counter `ε_c`.
    pub fn learner_epsilon(&self, counter_epsilon: f64, n_counters: usize, delta: f64) -> f64 {
        counter_epsilon * composition_factor(n_counters, delta)
    }
}

fn composition_factor(n: usize, delta: f64) -> f64 {
    (3.0 * n as f64 * (1.0 / delta).ln()).sqrt()
}

/// Threshold crossed by any of `n_counters` silent counters with
/// probability about `beta`.
pub fn calibrate_alpha(spec: &CounterSpec, n_counters: usize, beta: f64, n_trials: usize, seed: u64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) || n_counters == 0 {
        return Err(invalid("calibration needs beta in (0, 1) and at least one counter"));
    }
    zero_stream_peak_quantile(spec, 1.0 - beta / n_counters as f64, n_trials, seed)
}

/// One continual counter per hypothesis, fed `b_h = [y = h(x)] ∧ y`.
/// Emits the all-zero predictor until some released count exceeds `α`,
/// then commits to that hypothesis (lowest index on ties).
#[derive(Clone, Debug)]
pub struct CounterLearner {
    class: Arc<HypothesisClass>,
    counters: Vec<CounterState>,
    alpha: f64,
    horizon: usize,
    round: usize,
    zero: Hypothesis,
    committed: Option<usize>,
}

impl CounterLearner {
    pub fn committed(&self) -> Option<&Hypothesis> {
        self.committed.map(|i| self.class.member(i))
    }
}

impl Learner for CounterLearner {
    fn emit(&mut self, _rng: &mut SimRng) -> Result<&Hypothesis> {
        Ok(match self.committed {
            Some(i) => self.class.member(i),
            None => &self.zero,
        })
    }

    fn observe(&mut self, input: LabeledPoint, rng: &mut SimRng) -> Result<()> {
        if self.round >= self.horizon {
            return Err(Error::HorizonExceeded { horizon: self.horizon });
        }
        self.round += 1;
        if self.committed.is_some() {
            return Ok(());
        }
        for (i, c) in self.counters.iter_mut().enumerate() {
            let bit = input.y && self.class.member(i).eval(input.x) == input.y;
            let released = c.feed(bit, rng)?;
            if released > self.alpha && self.committed.is_none() {
                self.committed = Some(i);
            }
        }
        Ok(())
    }
}

pub struct CounterLearnerFactory {
    initial: CounterLearner,
    epsilon: f64,
    budget: CounterBudget,
}

impl CounterLearnerFactory {
    /// `spec.epsilon` is the learner-level budget, split per `budget`.
    pub fn new(class: Arc<HypothesisClass>, spec: CounterSpec, budget: CounterBudget) -> Result<Self> {
        let mut per = spec;
        per.epsilon = budget.per_counter_epsilon(spec.epsilon, class.len())?;
        let counters = (0..class.len()).map(|_| CounterState::new(per)).collect::<Result<Vec<_>>>()?;
        let zero = Hypothesis::zeros(class.domain_size());
        Ok(Self {
            initial: CounterLearner {
                class,
                counters,
                alpha: spec.alpha,
                horizon: spec.horizon,
                round: 0,
                zero,
                committed: None,
            },
            epsilon: spec.epsilon,
            budget,
        })
    }

    pub fn counter_spec(&self) -> &CounterSpec {
        self.initial.counters[0].spec()
    }

    pub fn budget(&self) -> CounterBudget {
        self.budget
    }

    pub fn alpha(&self) -> f64 {
        self.initial.alpha
    }
}

impl LearnerFactory for CounterLearnerFactory {
    fn domain_size(&self) -> usize {
        self.initial.class.domain_size()
    }

    fn name(&self) -> String {
        format!(
            "counter({:?}, eps={}, alpha={:.3})",
            self.counter_spec().mechanism,
            self.epsilon,
            self.initial.alpha
        )
        .to_lowercase()
    }

    fn spawn(&self) -> Box<dyn Learner> {
        Box::new(self.initial.clone())
    }
}
