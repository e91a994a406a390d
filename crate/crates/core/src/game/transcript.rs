use serde::{Deserialize, Serialize};

use super::{GameSequence, LabeledPoint};
use crate::error::{Error, Result};
use crate::hypothesis::{words_for, Hypothesis};

/// Full-predictor view of one run: every emitted `f̂_t` as a packed row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    domain_size: usize,
    row_words: usize,
    rows: Vec<u64>,
    inputs: Vec<LabeledPoint>,
    mistakes: Vec<bool>,
    mistake_count: usize,
    seed: u64,
    stream: u64,
}

/// One JSONL line of an exported transcript.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub prediction: String,
    pub x: usize,
    pub y: u8,
    pub mistake: bool,
}

impl Transcript {
    pub(crate) fn with_capacity(domain_size: usize, horizon: usize, seed: u64, stream: u64) -> Self {
        let row_words = words_for(domain_size);
        Self {
            domain_size,
            row_words,
            rows: Vec::with_capacity(row_words * horizon),
            inputs: Vec::with_capacity(horizon),
            mistakes: Vec::with_capacity(horizon),
            mistake_count: 0,
            seed,
            stream,
        }
    }

    pub(crate) fn push(&mut self, predictor: &Hypothesis, input: LabeledPoint) {
        self.rows.extend_from_slice(predictor.words());
        let mistake = predictor.eval(input.x) != input.y;
        self.inputs.push(input);
        self.mistakes.push(mistake);
        self.mistake_count += mistake as usize;
    }

    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// `f̂_t(x)`, both 1-based.
    #[inline]
    pub fn prediction(&self, t: usize, x: usize) -> bool {
        let i = x - 1;
        (self.rows[(t - 1) * self.row_words + i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn predictor(&self, t: usize) -> Hypothesis {
        let start = (t - 1) * self.row_words;
        Hypothesis::from_words(self.rows[start..start + self.row_words].to_vec(), self.domain_size)
    }

    /// True iff `f̂_t` equals `h` on the whole domain.
    pub fn predictor_equals(&self, t: usize, h: &Hypothesis) -> bool {
        let start = (t - 1) * self.row_words;
        &self.rows[start..start + self.row_words] == h.words()
    }

    pub fn input(&self, t: usize) -> LabeledPoint {
        self.inputs[t - 1]
    }

    pub fn mistakes(&self) -> &[bool] {
        &self.mistakes
    }

    pub fn mistake_count(&self) -> usize {
        self.mistake_count
    }

    /// First round in `[from, to]` with `f̂_t(x) = value`.
    pub fn first_with(&self, x: usize, value: bool, from: usize, to: usize) -> Option<usize> {
        (from.max(1)..=to.min(self.horizon())).find(|&t| self.prediction(t, x) == value)
    }

    /// Checks the bookkeeping invariants against the sequence that produced it.
    pub fn validate(&self, seq: &GameSequence) -> Result<()> {
        if self.horizon() != seq.horizon() {
            return Err(Error::InvariantViolation("transcript horizon mismatch".into()));
        }
        let mut count = 0;
        for t in 1..=self.horizon() {
            let input = seq.labeled(t);
            if self.input(t) != input {
                return Err(Error::InvariantViolation(format!("input mismatch at round {t}")));
            }
            let expected = self.prediction(t, input.x) != input.y;
            if self.mistakes[t - 1] != expected {
                return Err(Error::InvariantViolation(format!("mistake flag wrong at round {t}")));
            }
            count += expected as usize;
        }
        if count != self.mistake_count || count > self.horizon() {
            return Err(Error::InvariantViolation("mistake count mismatch".into()));
        }
        Ok(())
    }

    pub fn records(&self) -> impl Iterator<Item = RoundRecord> + '_ {
        (1..=self.horizon()).map(|t| {
            let input = self.input(t);
            RoundRecord {
                t,
                prediction: self.predictor(t).bit_string(),
                x: input.x,
                y: input.y as u8,
                mistake: self.mistakes[t - 1],
            }
        })
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for rec in self.records() {
            out.push_str(&serde_json::to_string(&rec)?);
            out.push('\n');
        }
        Ok(out)
    }
}
