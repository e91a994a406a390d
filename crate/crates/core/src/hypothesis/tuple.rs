use serde::{Deserialize, Serialize};

use super::{Hypothesis, HypothesisClass};
use crate::error::{invalid, Result};

/// `(f0, f1, x_eq, x_dif)` with `f0(x_eq) = f1(x_eq) = f0(x_dif) != f1(x_dif)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistinguishingTuple {
    pub f0: Hypothesis,
    pub f1: Hypothesis,
    pub x_eq: usize,
    pub x_dif: usize,
}

impl DistinguishingTuple {
    pub fn new(f0: Hypothesis, f1: Hypothesis, x_eq: usize, x_dif: usize) -> Result<Self> {
        if !is_distinguishing(&f0, &f1, x_eq, x_dif) {
            return Err(invalid(format!(
                "({f0:?}, {f1:?}, x_eq={x_eq}, x_dif={x_dif}) is not a distinguishing tuple"
            )));
        }
        Ok(Self { f0, f1, x_eq, x_dif })
    }

    pub fn domain_size(&self) -> usize {
        self.f0.len()
    }

    /// The label both hypotheses give `x_eq`, which `f0` also gives `x_dif`.
    pub fn base_label(&self) -> bool {
        self.f0.eval(self.x_eq)
    }

    pub fn summary(&self) -> TupleSummary {
        TupleSummary {
            f0: self.f0.label(),
            f1: self.f1.label(),
            x_eq: self.x_eq,
            x_dif: self.x_dif,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleSummary {
    pub f0: String,
    pub f1: String,
    pub x_eq: usize,
    pub x_dif: usize,
}

pub fn is_distinguishing(f0: &Hypothesis, f1: &Hypothesis, x_eq: usize, x_dif: usize) -> bool {
    let n = f0.len();
    if f1.len() != n || !(1..=n).contains(&x_eq) || !(1..=n).contains(&x_dif) {
        return false;
    }
    f0.eval(x_eq) == f1.eval(x_eq) && f0.eval(x_eq) == f0.eval(x_dif) && f0.eval(x_dif) != f1.eval(x_dif)
}

/// Lexicographically first tuple by `(f0 index, f1 index, x_eq, x_dif)`.
pub fn find_distinguishing_tuple(class: &HypothesisClass) -> Option<DistinguishingTuple> {
    let members = class.members();
    for (i, f0) in members.iter().enumerate() {
        for (j, f1) in members.iter().enumerate() {
            if i == j {
                continue;
            }
            for x_eq in class.domain().points() {
                if f0.eval(x_eq) != f1.eval(x_eq) {
                    continue;
                }
                for x_dif in class.domain().points() {
                    if is_distinguishing(f0, f1, x_eq, x_dif) {
                        return Some(DistinguishingTuple {
                            f0: f0.clone(),
                            f1: f1.clone(),
                            x_eq,
                            x_dif,
                        });
                    }
                }
            }
        }
    }
    None
}
