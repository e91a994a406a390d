//! The realizable, oblivious online game: the adversary commits a target
//! and a point sequence, then at every round the learner emits a full
//! predictor before it sees `(x_t, f*(x_t))`.

mod estimate;
mod event;
mod sim;
mod transcript;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hypothesis::{Hypothesis, HypothesisClass};

pub use estimate::{hoeffding_halfwidth, ConditionalEstimate, MeanEstimate, ProbEstimate, HOEFFDING_ALPHA};
pub use event::{Clause, EventPredicate, Quantifier};
pub use sim::{
    conditional_event_probabilities, conditional_event_probability, event_probabilities, event_probability, expected_mistakes, play, play_stream,
    run_trials, DEFAULT_MIN_ACCEPTED,
};
pub use transcript::{RoundRecord, Transcript};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub x: usize,
    pub y: bool,
}

/// A committed adversary: target `f*` and points `x_1..x_T`; labels are
/// always `f*(x_t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameSequence {
    target: Hypothesis,
    points: Vec<usize>,
}

impl GameSequence {
    pub fn new(target: Hypothesis, points: Vec<usize>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("a game sequence needs T >= 1 rounds"));
        }
        let n = target.len();
        if let Some((t, &x)) = points.iter().enumerate().find(|(_, &x)| x == 0 || x > n) {
            return Err(invalid(format!("points[{t}] = {x} outside domain [1, {n}]")));
        }
        Ok(Self { target, points })
    }

    /// `T` copies of `x`.
    pub fn repeated(target: Hypothesis, x: usize, horizon: usize) -> Result<Self> {
        Self::new(target, vec![x; horizon])
    }

    pub fn target(&self) -> &Hypothesis {
        &self.target
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn horizon(&self) -> usize {
        self.points.len()
    }

    pub fn domain_size(&self) -> usize {
        self.target.len()
    }

    /// Round `t` (1-based).
    pub fn labeled(&self, t: usize) -> LabeledPoint {
        let x = self.points[t - 1];
        LabeledPoint {
            x,
            y: self.target.eval(x),
        }
    }

    pub fn labeled_points(&self) -> impl Iterator<Item = LabeledPoint> + '_ {
        (1..=self.horizon()).map(|t| self.labeled(t))
    }

    /// Rounds (1-based) at which the two labelled inputs differ.
    pub fn differing_rounds(&self, other: &Self) -> Result<Vec<usize>> {
        if self.horizon() != other.horizon() {
            return Err(invalid(format!(
                "sequences have different horizons ({} vs {})",
                self.horizon(),
                other.horizon()
            )));
        }
        Ok((1..=self.horizon())
            .filter(|&t| self.labeled(t) != other.labeled(t))
            .collect())
    }

    pub fn with_point(&self, t: usize, x: usize) -> Result<Self> {
        let mut points = self.points.clone();
        *points
            .get_mut(t.wrapping_sub(1))
            .ok_or_else(|| invalid(format!("round {t} outside [1, {}]", self.horizon())))? = x;
        Self::new(self.target.clone(), points)
    }

    pub fn to_file(&self) -> SequenceFile {
        SequenceFile {
            target: self.target.label(),
            points: self.points.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }
}

/// `{"target": name, "points": [..]}`; the target resolves against a class by
/// member name or, failing that, by bit string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub target: String,
    pub points: Vec<usize>,
}

impl SequenceFile {
    pub fn resolve(&self, class: &HypothesisClass) -> Result<GameSequence> {
        let target = class
            .by_name(&self.target)
            .cloned()
            .or_else(|| {
                Hypothesis::parse_bits(&self.target)
                    .ok()
                    .and_then(|h| class.index_of(&h).map(|i| class.member(i).clone()))
            })
            .ok_or_else(|| invalid(format!("target: {:?} is not a member of the class", self.target)))?;
        GameSequence::new(target, self.points.clone())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::make_point_class;

    #[test]
    fn labels_follow_target() {
        let c = make_point_class(3).unwrap();
        let s = GameSequence::new(c.member(1).clone(), vec![2, 3, 1]).unwrap();
        let ys: Vec<bool> = s.labeled_points().map(|p| p.y).collect();
        assert_eq!(ys, [true, false, false]);
    }

    #[test]
    fn rejects_bad_points_and_empty() {
        let c = make_point_class(3).unwrap();
        assert!(GameSequence::new(c.member(0).clone(), vec![]).is_err());
        assert!(GameSequence::new(c.member(0).clone(), vec![1, 4]).is_err());
    }

    #[test]
    fn sequence_file_resolution() {
        let c = make_point_class(3).unwrap();
        let f = SequenceFile::from_json(r#"{"target": "f2", "points": [2, 2, 2]}"#).unwrap();
        assert_eq!(f.resolve(&c).unwrap().target().bit_string(), "010");
        let by_bits = SequenceFile::from_json(r#"{"target": "001", "points": [3]}"#).unwrap();
        assert_eq!(by_bits.resolve(&c).unwrap().target().bit_string(), "001");
        let missing = SequenceFile::from_json(r#"{"points": [1]}"#).unwrap_err();
        assert!(missing.to_string().contains("target"));
    }

    #[test]
    fn neighbours_differ_in_one_round() {
        let c = make_point_class(3).unwrap();
        let a = GameSequence::repeated(c.member(1).clone(), 3, 5).unwrap();
        let b = a.with_point(4, 2).unwrap();
        assert_eq!(a.differing_rounds(&b).unwrap(), vec![4]);
    }
}
