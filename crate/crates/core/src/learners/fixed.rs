use super::{Learner, LearnerFactory};
use crate::error::Result;
use crate::game::LabeledPoint;
use crate::hypothesis::Hypothesis;
use crate::rng::SimRng;

/// Emits the same predictor forever; ignores its input entirely.
#[derive(Clone, Debug)]
pub struct Fixed {
    predictor: Hypothesis,
}

impl Learner for Fixed {
    fn emit(&mut self, _rng: &mut SimRng) -> Result<&Hypothesis> {
        Ok(&self.predictor)
    }

    fn observe(&mut self, _input: LabeledPoint, _rng: &mut SimRng) -> Result<()> {
        Ok(())
    }
}

pub struct FixedFactory {
    predictor: Hypothesis,
}

impl FixedFactory {
    pub fn new(predictor: Hypothesis) -> Self {
        Self { predictor }
    }

    pub fn all_zero(domain_size: usize) -> Self {
        Self::new(Hypothesis::zeros(domain_size))
    }
}

impl LearnerFactory for FixedFactory {
    fn domain_size(&self) -> usize {
        self.predictor.len()
    }

    fn name(&self) -> String {
        format!("fixed({})", self.predictor.bit_string())
    }

    fn spawn(&self) -> Box<dyn Learner> {
        Box::new(Fixed {
            predictor: self.predictor.clone(),
        })
    }
}
