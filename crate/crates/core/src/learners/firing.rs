use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Learner, LearnerFactory};
use crate::error::{invalid, Error, Result};
use crate::game::LabeledPoint;
use crate::hypothesis::Hypothesis;
use crate::rng::SimRng;

/// Firing probability as a function of the mistakes made so far.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiringSchedule {
    /// `min(1, m / κ)`
    Linear { kappa: f64 },
    /// `1 - (1 - ρ)^m`
    Geometric { rho: f64 },
}

impl FiringSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FiringSchedule::Linear { kappa } if !(kappa > 0.0) => {
                Err(invalid(format!("linear schedule needs kappa > 0, got {kappa}")))
            }
            FiringSchedule::Geometric { rho } if !(0.0..=1.0).contains(&rho) => {
                Err(invalid(format!("geometric schedule needs rho in [0, 1], got {rho}")))
            }
            _ => Ok(()),
        }
    }

    pub fn probability(&self, mistakes: usize) -> f64 {
        let m = mistakes as f64;
        match *self {
            FiringSchedule::Linear { kappa } => (m / kappa).min(1.0),
            FiringSchedule::Geometric { rho } => 1.0 - (1.0 - rho).powf(m),
        }
    }
}

/// Uniform firing learner over POINT_3 with the target among `f1`, `f2`.
/// Until it fires it emits a fresh uniform draw from the two; each round it
/// first fires with probability `p(m)` and then commits to the candidate
/// consistent with everything observed.
#[derive(Clone, Debug)]
pub struct UniformFiring {
    schedule: FiringSchedule,
    candidates: [Hypothesis; 2],
    consistent: [bool; 2],
    mistakes: usize,
    current: usize,
    fired: bool,
}

impl UniformFiring {
    pub fn new(schedule: FiringSchedule) -> Result<Self> {
        schedule.validate()?;
        Ok(Self {
            schedule,
            candidates: [Hypothesis::indicator(3, 1), Hypothesis::indicator(3, 2)],
            consistent: [true; 2],
            mistakes: 0,
            current: 0,
            fired: false,
        })
    }

    pub fn fired(&self) -> bool {
        self.fired
    }

    pub fn mistakes(&self) -> usize {
        self.mistakes
    }
}

impl Learner for UniformFiring {
    fn emit(&mut self, rng: &mut SimRng) -> Result<&Hypothesis> {
        if !self.fired {
            let p = self.schedule.probability(self.mistakes);
            if p > 0.0 && rng.gen_bool(p) {
                self.current = match self.consistent {
                    [true, false] => 0,
                    [false, true] => 1,
                    _ => {
                        return Err(Error::InvariantViolation(format!(
                            "firing learner fired after {} mistakes without identifying the target",
                            self.mistakes
                        )))
                    }
                };
                self.fired = true;
            } else {
                self.current = rng.gen_bool(0.5) as usize;
            }
        }
        Ok(&self.candidates[self.current])
    }

    fn observe(&mut self, input: LabeledPoint, _rng: &mut SimRng) -> Result<()> {
        if self.candidates[self.current].eval(input.x) != input.y {
            self.mistakes += 1;
        }
        for (ok, h) in self.consistent.iter_mut().zip(&self.candidates) {
            *ok &= h.eval(input.x) == input.y;
        }
        Ok(())
    }
}

pub struct UniformFiringFactory {
    initial: UniformFiring,
}

impl UniformFiringFactory {
    pub fn new(schedule: FiringSchedule) -> Result<Self> {
        Ok(Self {
            initial: UniformFiring::new(schedule)?,
        })
    }

    pub fn schedule(&self) -> FiringSchedule {
        self.initial.schedule
    }
}

impl LearnerFactory for UniformFiringFactory {
    fn domain_size(&self) -> usize {
        3
    }

    fn name(&self) -> String {
        match self.initial.schedule {
            FiringSchedule::Linear { kappa } => format!("uniform_firing(linear, kappa={kappa})"),
            FiringSchedule::Geometric { rho } => format!("uniform_firing(geometric, rho={rho})"),
        }
    }

    fn spawn(&self) -> Box<dyn Learner> {
        Box::new(self.initial.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{play, GameSequence};

    fn f(i: usize) -> Hypothesis {
        Hypothesis::indicator(3, i)
    }

    #[test]
    fn schedules_start_at_zero_and_grow() {
        for s in [FiringSchedule::Linear { kappa: 20.0 }, FiringSchedule::Geometric { rho: 0.3 }] {
            assert_eq!(s.probability(0), 0.0);
            let ps: Vec<f64> = (0..50).map(|m| s.probability(m)).collect();
            assert!(ps.windows(2).all(|w| w[0] <= w[1]));
        }
        assert_eq!(FiringSchedule::Linear { kappa: 20.0 }.probability(40), 1.0);
        assert!(FiringSchedule::Linear { kappa: 0.0 }.validate().is_err());
    }

    #[test]
    fn never_errs_on_the_shared_zero() {
        let fac = UniformFiringFactory::new(FiringSchedule::Linear { kappa: 1.0 }).unwrap();
        let seq = GameSequence::repeated(f(2), 3, 50).unwrap();
        for seed in 0..10 {
            assert_eq!(play(&fac, &seq, seed).unwrap().mistake_count(), 0);
        }
    }

    #[test]
    fn immediate_schedule_commits_after_first_mistake() {
        let fac = UniformFiringFactory::new(FiringSchedule::Linear { kappa: 1.0 }).unwrap();
        let seq = GameSequence::repeated(f(1), 1, 30).unwrap();
        for seed in 0..50 {
            let tr = play(&fac, &seq, seed).unwrap();
            assert!(tr.mistake_count() <= 1);
            let first = tr.mistakes().iter().position(|&m| m).map_or(1, |t| t + 2);
            for t in first..=30 {
                assert!(tr.predictor_equals(t, &f(1)), "seed {seed} t {t}");
            }
        }
    }

    #[test]
    fn suffix_constant_after_firing() {
        let schedule = FiringSchedule::Geometric { rho: 0.2 };
        let points: Vec<usize> = (0..200).map(|t| if t % 7 == 0 { 2 } else { 3 }).collect();
        let seq = GameSequence::new(f(2), points).unwrap();
        let mut fired_runs = 0;
        for seed in 0..30 {
            let mut learner = UniformFiring::new(schedule).unwrap();
            let mut rng = crate::rng::stream(seed, 0);
            let mut fired_at = None;
            for t in 1..=200 {
                let h = learner.emit(&mut rng).unwrap().clone();
                if learner.fired() {
                    fired_at.get_or_insert(t);
                    assert!(h.same_labels(&f(2)), "seed {seed} t {t}");
                }
                learner.observe(seq.labeled(t), &mut rng).unwrap();
            }
            fired_runs += fired_at.is_some() as usize;
        }
        assert!(fired_runs > 20);
    }
}
