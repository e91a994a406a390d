use std::sync::Arc;

use super::{Learner, LearnerFactory};
use crate::error::{Error, Result};
use crate::game::LabeledPoint;
use crate::hypothesis::{Hypothesis, HypothesisClass, LdimSolver, MemberSet, SearchBudget};
use crate::rng::SimRng;

/// SOA prediction on version space `set`: 1 at `x` iff
/// `Ldim(V|x=1) > Ldim(V|x=0)`, an empty restriction counting as -1.
pub fn soa_predictor(class: &HypothesisClass, set: &MemberSet, solver: &mut LdimSolver) -> Result<Hypothesis> {
    let n = set.len();
    let mut h = Hypothesis::zeros(class.domain_size());
    for x in class.domain().points() {
        let c1 = class.count_ones_at(set, x);
        let c0 = n - c1;
        let one = match (c0, c1) {
            (_, 0) => false,
            (0, _) => true,
            (_, 1) => false,
            (1, _) => true,
            _ => {
                let l1 = solver.ldim(class, &class.restrict(set, x, true))?;
                let l0 = solver.ldim(class, &class.restrict(set, x, false))?;
                l1 > l0
            }
        };
        h.set(x, one);
    }
    Ok(h)
}

/// Version-space SOA. Deterministic and not private.
#[derive(Clone, Debug)]
pub struct Soa {
    class: Arc<HypothesisClass>,
    version: MemberSet,
    solver: LdimSolver,
    predictor: Hypothesis,
}

impl Soa {
    pub fn new(class: Arc<HypothesisClass>, budget: SearchBudget) -> Result<Self> {
        let mut solver = LdimSolver::new(budget);
        let version = class.all();
        let predictor = soa_predictor(&class, &version, &mut solver)?;
        Ok(Self {
            class,
            version,
            solver,
            predictor,
        })
    }

    pub fn version_space(&self) -> &MemberSet {
        &self.version
    }

    pub fn predictor(&self) -> &Hypothesis {
        &self.predictor
    }
}

impl Learner for Soa {
    fn emit(&mut self, _rng: &mut SimRng) -> Result<&Hypothesis> {
        Ok(&self.predictor)
    }

    fn observe(&mut self, input: LabeledPoint, _rng: &mut SimRng) -> Result<()> {
        let next = self.class.restrict(&self.version, input.x, input.y);
        if next.is_empty() {
            return Err(Error::InconsistentLabels {
                x: input.x,
                y: input.y as u8,
            });
        }
        if next.len() != self.version.len() {
            self.version = next;
            self.predictor = soa_predictor(&self.class, &self.version, &mut self.solver)?;
        }
        Ok(())
    }
}

pub struct SoaFactory {
    initial: Soa,
}

impl SoaFactory {
    pub fn new(class: Arc<HypothesisClass>) -> Result<Self> {
        Self::with_budget(class, SearchBudget::default())
    }

    pub fn with_budget(class: Arc<HypothesisClass>, budget: SearchBudget) -> Result<Self> {
        Ok(Self {
            initial: Soa::new(class, budget)?,
        })
    }
}

impl LearnerFactory for SoaFactory {
    fn domain_size(&self) -> usize {
        self.initial.class.domain_size()
    }

    fn name(&self) -> String {
        "soa".into()
    }

    fn spawn(&self) -> Box<dyn Learner> {
        Box::new(self.initial.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{play, GameSequence};
    use crate::hypothesis::{littlestone_dimension, make_full_cube, make_point_class, Domain};

    fn factory(class: HypothesisClass) -> SoaFactory {
        SoaFactory::new(Arc::new(class)).unwrap()
    }

    #[test]
    fn point_class_zero_then_commit() {
        let c = make_point_class(3).unwrap();
        let f = factory(c.clone());
        let seq = GameSequence::new(c.member(1).clone(), vec![2, 2, 2]).unwrap();
        let tr = play(&f, &seq, 0).unwrap();
        assert_eq!(tr.mistake_count(), 1);
        assert_eq!(tr.predictor(1).bit_string(), "000");
        assert_eq!(tr.predictor(2).bit_string(), "010");
        assert_eq!(tr.predictor(3).bit_string(), "010");

        let quiet = GameSequence::new(c.member(1).clone(), vec![3, 3, 3]).unwrap();
        assert_eq!(play(&f, &quiet, 0).unwrap().mistake_count(), 0);
    }

    #[test]
    fn singleton_never_errs() {
        let c = HypothesisClass::new(Domain::new(3).unwrap(), vec![Hypothesis::parse_bits("101").unwrap()]).unwrap();
        let f = factory(c.clone());
        let seq = GameSequence::new(c.member(0).clone(), vec![1, 2, 3, 1]).unwrap();
        let tr = play(&f, &seq, 0).unwrap();
        assert_eq!(tr.mistake_count(), 0);
        assert_eq!(tr.predictor(1).bit_string(), "101");
    }

    #[test]
    fn inconsistent_label_is_an_error() {
        let c = make_point_class(3).unwrap();
        let mut soa = Soa::new(Arc::new(c), SearchBudget::default()).unwrap();
        let mut rng = crate::rng::stream(0, 0);
        soa.observe(LabeledPoint { x: 1, y: true }, &mut rng).unwrap();
        let err = soa.observe(LabeledPoint { x: 2, y: true }, &mut rng).unwrap_err();
        assert!(matches!(err, Error::InconsistentLabels { x: 2, y: 1 }));
    }

    #[test]
    fn cube_mistakes_within_ldim() {
        let c = make_full_cube(3).unwrap();
        let d = littlestone_dimension(&c).unwrap() as usize;
        let f = factory(c.clone());
        for target in c.members() {
            let seq = GameSequence::new(target.clone(), vec![1, 2, 3, 3, 2, 1]).unwrap();
            assert!(play(&f, &seq, 0).unwrap().mistake_count() <= d);
        }
    }

    #[test]
    fn large_point_class_needs_no_search() {
        let c = make_point_class(500).unwrap();
        let f = factory(c.clone());
        let seq = GameSequence::new(c.member(41).clone(), vec![42, 7, 42]).unwrap();
        assert_eq!(play(&f, &seq, 0).unwrap().mistake_count(), 1);
    }
}
