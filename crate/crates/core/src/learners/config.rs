use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    calibrate_alpha, CounterBudget, CounterLearnerFactory, FiringSchedule, FixedFactory, LearnerFactory,
    NameAndShameFactory, SoaFactory, UniformFiringFactory,
};
use crate::counters::{CounterSpec, Mechanism};
use crate::error::{invalid, Result};
use crate::hypothesis::{Hypothesis, HypothesisClass};
use crate::rng::derive_seed;

fn one() -> f64 {
    1.0
}

fn default_calibration_beta() -> f64 {
    0.1
}

fn default_calibration_trials() -> usize {
    2000
}

/// `{"kind": "...", ...}` record selecting and parameterising a learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerConfig {
    Soa {},
    NameAndShame {
        delta: f64,
    },
    Counter {
        mechanism: Mechanism,
        #[serde(default = "one")]
        epsilon: f64,
        /// Firing threshold; calibrated on silent streams when absent.
        #[serde(default)]
        alpha: Option<f64>,
        /// Target probability that calibration lets a silent counter fire.
        #[serde(default = "default_calibration_beta")]
        beta: f64,
        #[serde(default = "default_calibration_trials")]
        calibration_trials: usize,
        /// Counter horizon; defaults to the game horizon.
        #[serde(default)]
        horizon: Option<usize>,
        #[serde(default)]
        budget: CounterBudget,
    },
    UniformFiring {
        schedule: FiringSchedule,
    },
    Fixed {
        bits: String,
    },
}

impl LearnerConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            LearnerConfig::Soa {} => "soa",
            LearnerConfig::NameAndShame { .. } => "name_and_shame",
            LearnerConfig::Counter { .. } => "counter",
            LearnerConfig::UniformFiring { .. } => "uniform_firing",
            LearnerConfig::Fixed { .. } => "fixed",
        }
    }

    /// `horizon` is the game length; `seed` drives any calibration.
    pub fn build(&self, class: Arc<HypothesisClass>, horizon: usize, seed: u64) -> Result<Box<dyn LearnerFactory>> {
        Ok(match self {
            LearnerConfig::Soa {} => Box::new(SoaFactory::new(class)?),
            LearnerConfig::NameAndShame { delta } => Box::new(NameAndShameFactory::new(class, *delta)?),
            LearnerConfig::Counter {
                mechanism,
                epsilon,
                alpha,
                beta,
                calibration_trials,
                horizon: counter_horizon,
                budget,
            } => {
                let h = counter_horizon.unwrap_or(horizon);
                let mut spec = CounterSpec::new(h, *epsilon, *mechanism);
                let alpha = match alpha {
                    Some(a) => *a,
                    None => {
                        let mut per = spec;
                        per.epsilon = budget.per_counter_epsilon(*epsilon, class.len())?;
                        calibrate_alpha(&per, class.len(), *beta, *calibration_trials, derive_seed(seed, 0xA1FA))?
                    }
                };
                spec.alpha = alpha;
                spec.beta = *beta;
                Box::new(CounterLearnerFactory::new(class, spec, *budget)?)
            }
            LearnerConfig::UniformFiring { schedule } => {
                if class.domain_size() != 3 {
                    return Err(invalid(format!(
                        "uniform_firing works over POINT_3, class has domain size {}",
                        class.domain_size()
                    )));
                }
                Box::new(UniformFiringFactory::new(*schedule)?)
            }
            LearnerConfig::Fixed { bits } => {
                let h = Hypothesis::parse_bits(bits)?;
                if h.len() != class.domain_size() {
                    return Err(invalid(format!(
                        "bits: length {} does not match domain size {}",
                        h.len(),
                        class.domain_size()
                    )));
                }
                Box::new(FixedFactory::new(h))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::make_point_class;

    #[test]
    fn parses_each_kind() {
        let cases = [
            r#"{"kind": "soa"}"#,
            r#"{"kind": "name_and_shame", "delta": 0.1}"#,
            r#"{"kind": "counter", "mechanism": "noise_free", "alpha": 2}"#,
            r#"{"kind": "counter", "mechanism": "tree", "epsilon": 0.5, "budget": {"total": {"delta": 0.001}}}"#,
            r#"{"kind": "uniform_firing", "schedule": {"kind": "linear", "kappa": 20}}"#,
            r#"{"kind": "fixed", "bits": "000"}"#,
        ];
        let class = Arc::new(make_point_class(3).unwrap());
        for c in cases {
            let cfg: LearnerConfig = serde_json::from_str(c).unwrap();
            let f = cfg.build(class.clone(), 16, 1).unwrap();
            assert_eq!(f.domain_size(), 3, "{c}");
        }
    }

    #[test]
    fn unknown_fields_and_kinds_rejected() {
        assert!(serde_json::from_str::<LearnerConfig>(r#"{"kind": "soa", "delta": 1}"#).is_err());
        assert!(serde_json::from_str::<LearnerConfig>(r#"{"kind": "dp_soa"}"#).is_err());
        let err = serde_json::from_str::<LearnerConfig>(r#"{"kind": "name_and_shame"}"#).unwrap_err();
        assert!(err.to_string().contains("delta"));
    }

    #[test]
    fn fixed_length_checked() {
        let class = Arc::new(make_point_class(3).unwrap());
        let cfg = LearnerConfig::Fixed { bits: "0000".into() };
        assert!(cfg.build(class, 4, 0).is_err());
    }
}
