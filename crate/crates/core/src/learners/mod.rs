//! Learners as state machines: `emit` the round's full predictor, then
//! `observe` the labelled point. Each learner documents the privacy level it
//! is meant to have; none is proven here, they are audited empirically.

mod config;
mod counter;
mod firing;
mod fixed;
mod name_and_shame;
mod soa;

use crate::error::Result;
use crate::game::LabeledPoint;
use crate::hypothesis::Hypothesis;
use crate::rng::SimRng;

pub use config::LearnerConfig;
pub use counter::{calibrate_alpha, CounterBudget, CounterLearner, CounterLearnerFactory};
pub use firing::{FiringSchedule, UniformFiring, UniformFiringFactory};
pub use fixed::{Fixed, FixedFactory};
pub use name_and_shame::{NameAndShame, NameAndShameFactory};
pub use soa::{soa_predictor, Soa, SoaFactory};

pub trait Learner: Send {
    /// The predictor `f̂_t` for the coming round.
    fn emit(&mut self, rng: &mut SimRng) -> Result<&Hypothesis>;
    /// Reveals `(x_t, y_t)`.
    fn observe(&mut self, input: LabeledPoint, rng: &mut SimRng) -> Result<()>;
}

/// Shareable, stateless recipe for fresh learner instances.
pub trait LearnerFactory: Send + Sync {
    fn domain_size(&self) -> usize;
    fn name(&self) -> String;
    fn spawn(&self) -> Box<dyn Learner>;
}

/// A factory from a closure.
pub struct FnFactory<F> {
    domain_size: usize,
    name: String,
    make: F,
}

impl<F> FnFactory<F>
where
    F: Fn() -> Box<dyn Learner> + Send + Sync,
{
    pub fn new(domain_size: usize, name: impl Into<String>, make: F) -> Self {
        Self {
            domain_size,
            name: name.into(),
            make,
        }
    }
}

impl<F> LearnerFactory for FnFactory<F>
where
    F: Fn() -> Box<dyn Learner> + Send + Sync,
{
    fn domain_size(&self) -> usize {
        self.domain_size
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn spawn(&self) -> Box<dyn Learner> {
        (self.make)()
    }
}
