use std::sync::Arc;

use rand::Rng;

use super::{Learner, LearnerFactory, Soa};
use crate::error::{invalid, Result};
use crate::game::LabeledPoint;
use crate::hypothesis::{Hypothesis, HypothesisClass, SearchBudget};
use crate::rng::SimRng;

/// Keeps an admitted set `S` and predicts with SOA trained on `S` alone;
/// each observation joins `S` with probability `δ`. Intended (0, δ)-DP.
///
/// Since SOA's state is its version space, replaying `S` in arrival order
/// is the same as filtering on admitted points only.
#[derive(Clone, Debug)]
pub struct NameAndShame {
    soa: Soa,
    delta: f64,
    admitted: usize,
}

impl NameAndShame {
    pub fn admitted(&self) -> usize {
        self.admitted
    }
}

impl Learner for NameAndShame {
    fn emit(&mut self, rng: &mut SimRng) -> Result<&Hypothesis> {
        self.soa.emit(rng)
    }

    fn observe(&mut self, input: LabeledPoint, rng: &mut SimRng) -> Result<()> {
        if rng.gen_bool(self.delta) {
            self.admitted += 1;
            self.soa.observe(input, rng)?;
        }
        Ok(())
    }
}

pub struct NameAndShameFactory {
    initial: NameAndShame,
}

impl NameAndShameFactory {
    pub fn new(class: Arc<HypothesisClass>, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(invalid(format!("name_and_shame delta must lie in (0, 1], got {delta}")));
        }
        Ok(Self {
            initial: NameAndShame {
                soa: Soa::new(class, SearchBudget::default())?,
                delta,
                admitted: 0,
            },
        })
    }
}

impl LearnerFactory for NameAndShameFactory {
    fn domain_size(&self) -> usize {
        self.initial.soa.predictor().len()
    }

    fn name(&self) -> String {
        format!("name_and_shame(delta={})", self.initial.delta)
    }

    fn spawn(&self) -> Box<dyn Learner> {
        Box::new(self.initial.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{expected_mistakes, play, GameSequence};
    use crate::hypothesis::make_point_class;
    use crate::learners::SoaFactory;

    #[test]
    fn delta_one_matches_soa() {
        let c = Arc::new(make_point_class(4).unwrap());
        let nas = NameAndShameFactory::new(c.clone(), 1.0).unwrap();
        let soa = SoaFactory::new(c.clone()).unwrap();
        let seq = GameSequence::new(c.member(2).clone(), vec![1, 3, 2, 3, 4, 3]).unwrap();
        for seed in 0..5 {
            assert_eq!(play(&nas, &seq, seed).unwrap(), play(&soa, &seq, seed).unwrap());
        }
    }

    #[test]
    fn geometric_mistakes() {
        let c = Arc::new(make_point_class(5).unwrap());
        let f = NameAndShameFactory::new(c.clone(), 0.1).unwrap();
        let seq = GameSequence::repeated(c.member(0).clone(), 1, 400).unwrap();
        let m = expected_mistakes(&f, &seq, 2000, 7).unwrap();
        assert!((m.mean - 10.0).abs() <= 3.0 * m.std_error, "{m:?}");
    }

    #[test]
    fn rejects_bad_delta() {
        let c = Arc::new(make_point_class(2).unwrap());
        assert!(NameAndShameFactory::new(c.clone(), 0.0).is_err());
        assert!(NameAndShameFactory::new(c, 1.5).is_err());
    }
}
