use serde::{Deserialize, Serialize};

use super::Transcript;
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    Forall,
    Exists,
}

/// `Q t in [start, end]: f̂_t(point) = value`. The interval is inclusive and
/// 1-based; `start = end + 1` denotes the empty interval, on which `forall`
/// holds and `exists` fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub quantifier: Quantifier,
    pub start: usize,
    pub end: usize,
    pub point: usize,
    pub value: bool,
}

impl Clause {
    pub fn is_empty_interval(&self) -> bool {
        self.start > self.end
    }

    fn holds(&self, tr: &Transcript) -> bool {
        let mut rounds = self.start..=self.end;
        match self.quantifier {
            Quantifier::Forall => rounds.all(|t| tr.prediction(t, self.point) == self.value),
            Quantifier::Exists => rounds.any(|t| tr.prediction(t, self.point) == self.value),
        }
    }
}

/// A conjunction of clauses over one transcript; no clauses means "always".
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventPredicate {
    pub clauses: Vec<Clause>,
}

impl EventPredicate {
    pub fn always() -> Self {
        Self::default()
    }

    pub fn forall(self, start: usize, end: usize, point: usize, value: bool) -> Self {
        self.with(Quantifier::Forall, start, end, point, value)
    }

    pub fn exists(self, start: usize, end: usize, point: usize, value: bool) -> Self {
        self.with(Quantifier::Exists, start, end, point, value)
    }

    fn with(mut self, quantifier: Quantifier, start: usize, end: usize, point: usize, value: bool) -> Self {
        self.clauses.push(Clause {
            quantifier,
            start,
            end,
            point,
            value,
        });
        self
    }

    pub fn and(mut self, other: &Self) -> Self {
        self.clauses.extend_from_slice(&other.clauses);
        self
    }

    pub fn validate(&self, horizon: usize, domain_size: usize) -> Result<()> {
        for (i, c) in self.clauses.iter().enumerate() {
            if c.start == 0 || c.end > horizon || c.start > c.end + 1 {
                return Err(invalid(format!(
                    "clause {i}: interval [{}, {}] not within [1, {horizon}]",
                    c.start, c.end
                )));
            }
            if c.point == 0 || c.point > domain_size {
                return Err(invalid(format!("clause {i}: point {} outside domain", c.point)));
            }
        }
        Ok(())
    }

    pub fn holds(&self, tr: &Transcript) -> bool {
        self.clauses.iter().all(|c| c.holds(tr))
    }
}
