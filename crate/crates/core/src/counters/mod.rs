//! Continual counters: release a running count of a bit stream at every step.
//!
//! A `(T, α, β, ε)` counter is ε-DP in its input stream and, with probability
//! at least `1 - β`, every released prefix is within `α` of the true one.

mod accuracy;
mod laplace;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::SimRng;

pub use accuracy::{
    accuracy_check, max_error, max_error_samples, polylog_threshold, trace, trace_csv, zero_stream_peak_quantile,
    TraceRow,
};
pub use laplace::laplace_sample;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    /// Fresh `Lap(1/ε)` on every increment; releases the noisy running sum.
    Naive,
    /// Dyadic binary-tree mechanism.
    Tree,
    /// Exact prefix sums.
    NoiseFree,
}

fn default_epsilon() -> f64 {
    1.0
}

fn default_beta() -> f64 {
    0.05
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterSpec {
    pub horizon: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub mechanism: Mechanism,
    /// Accuracy target, in count units.
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

impl CounterSpec {
    pub fn new(horizon: usize, epsilon: f64, mechanism: Mechanism) -> Self {
        Self {
            horizon,
            epsilon,
            mechanism,
            alpha: 0.0,
            beta: default_beta(),
        }
    }

    pub fn noise_free(horizon: usize) -> Self {
        Self::new(horizon, f64::INFINITY, Mechanism::NoiseFree)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(invalid("counter horizon must be at least 1"));
        }
        if self.mechanism != Mechanism::NoiseFree && !(self.epsilon > 0.0) {
            return Err(invalid(format!("counter epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(invalid(format!("counter beta must lie in [0, 1], got {}", self.beta)));
        }
        if self.alpha.is_nan() || self.alpha < 0.0 {
            return Err(invalid("counter alpha must be >= 0"));
        }
        Ok(())
    }

    /// `⌈log₂T⌉ + 1`: tree levels, and the most node values in one release.
    pub fn tree_levels(&self) -> usize {
        ceil_log2(self.horizon) + 1
    }

    /// Laplace scale per tree node, `(⌈log₂T⌉ + 1) / ε`; zero when ε = ∞.
    pub fn tree_node_scale(&self) -> f64 {
        self.tree_levels() as f64 / self.epsilon
    }
}

pub(crate) fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

#[derive(Clone, Debug)]
enum Noise {
    Exact,
    Naive {
        scale: f64,
        noisy_sum: f64,
    },
    Tree {
        scale: f64,
        /// Exact partial sums of the currently open node at each level.
        partial: Vec<u64>,
        /// Noisy value of the most recently closed node at each level.
        noisy: Vec<f64>,
        /// Noise of the most recently closed node at each level.
        noise: Vec<f64>,
    },
}

/// Running state of one counter.
#[derive(Clone, Debug)]
pub struct CounterState {
    spec: CounterSpec,
    t: usize,
    true_sum: u64,
    noise: Noise,
    released: Vec<f64>,
}

impl CounterState {
    pub fn new(spec: CounterSpec) -> Result<Self> {
        spec.validate()?;
        let noise = match spec.mechanism {
            Mechanism::NoiseFree => Noise::Exact,
            Mechanism::Naive => Noise::Naive {
                scale: 1.0 / spec.epsilon,
                noisy_sum: 0.0,
            },
            Mechanism::Tree => {
                let levels = spec.tree_levels();
                Noise::Tree {
                    scale: spec.tree_node_scale(),
                    partial: vec![0; levels],
                    noisy: vec![0.0; levels],
                    noise: vec![0.0; levels],
                }
            }
        };
        Ok(Self {
            spec,
            t: 0,
            true_sum: 0,
            noise,
            released: Vec::with_capacity(spec.horizon),
        })
    }

    pub fn spec(&self) -> &CounterSpec {
        &self.spec
    }

    pub fn round(&self) -> usize {
        self.t
    }

    pub fn released(&self) -> &[f64] {
        &self.released
    }

    pub fn last_released(&self) -> Option<f64> {
        self.released.last().copied()
    }

    pub(crate) fn true_prefix(&self) -> u64 {
        self.true_sum
    }

    /// Node values summed into the latest release (tree mechanism), i.e. the
    /// number of independent Laplace terms in its error.
    pub fn noise_terms(&self) -> usize {
        match self.noise {
            Noise::Exact => 0,
            Noise::Naive { .. } => self.t,
            Noise::Tree { .. } => self.t.count_ones() as usize,
        }
    }

    /// Advances one round and returns the released value.
    pub fn feed(&mut self, bit: bool, rng: &mut SimRng) -> Result<f64> {
        if self.t >= self.spec.horizon {
            return Err(Error::HorizonExceeded {
                horizon: self.spec.horizon,
            });
        }
        self.t += 1;
        self.true_sum += bit as u64;
        let t = self.t;
        let value = match &mut self.noise {
            Noise::Exact => self.true_sum as f64,
            Noise::Naive { scale, noisy_sum } => {
                *noisy_sum += bit as u64 as f64 + draw(*scale, rng);
                *noisy_sum
            }
            Noise::Tree {
                scale,
                partial,
                noisy,
                noise,
            } => {
                // t closes the node of level i = tz(t) covering (t - 2^i, t]
                let i = t.trailing_zeros() as usize;
                let mut sum = bit as u64;
                for j in 0..i {
                    sum += partial[j];
                    partial[j] = 0;
                    noisy[j] = 0.0;
                    noise[j] = 0.0;
                }
                partial[i] = sum;
                noise[i] = draw(*scale, rng);
                noisy[i] = sum as f64 + noise[i];
                let mut out = 0.0;
                let mut rest = t;
                while rest != 0 {
                    let j = rest.trailing_zeros() as usize;
                    out += noisy[j];
                    rest &= rest - 1;
                }
                out
            }
        };
        self.released.push(value);
        Ok(value)
    }
}

fn draw(scale: f64, rng: &mut SimRng) -> f64 {
    if scale == 0.0 {
        0.0
    } else {
        laplace_sample(scale, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn run(spec: CounterSpec, bits: &[bool], seed: u64) -> Vec<f64> {
        let mut c = CounterState::new(spec).unwrap();
        let mut rng = stream(seed, 0);
        bits.iter().map(|&b| c.feed(b, &mut rng).unwrap()).collect()
    }

    #[test]
    fn noise_free_releases_prefix_sums() {
        let out = run(CounterSpec::noise_free(4), &[true, false, true, true], 1);
        assert_eq!(out, vec![1.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn noise_free_exhaustive_small_streams() {
        for t in 1..=12usize {
            for mask in 0u32..(1 << t) {
                let bits: Vec<bool> = (0..t).map(|i| (mask >> i) & 1 == 1).collect();
                let out = run(CounterSpec::noise_free(t), &bits, 0);
                let mut acc = 0.0;
                for (i, &b) in bits.iter().enumerate() {
                    acc += b as u8 as f64;
                    assert_eq!(out[i], acc);
                }
            }
        }
    }

    #[test]
    fn tree_without_noise_is_exact() {
        let spec = CounterSpec::new(37, f64::INFINITY, Mechanism::Tree);
        let bits: Vec<bool> = (0..37).map(|i| i % 3 != 1).collect();
        let out = run(spec, &bits, 5);
        let mut acc = 0.0;
        for (i, &b) in bits.iter().enumerate() {
            acc += b as u8 as f64;
            assert_eq!(out[i], acc, "t={}", i + 1);
        }
    }

    #[test]
    fn horizon_is_enforced() {
        let mut c = CounterState::new(CounterSpec::noise_free(2)).unwrap();
        let mut rng = stream(0, 0);
        c.feed(true, &mut rng).unwrap();
        c.feed(true, &mut rng).unwrap();
        assert!(matches!(c.feed(true, &mut rng), Err(Error::HorizonExceeded { horizon: 2 })));
    }

    #[test]
    fn tree_release_uses_at_most_levels_terms() {
        for horizon in [1usize, 2, 7, 64, 100, 1024] {
            let spec = CounterSpec::new(horizon, 1.0, Mechanism::Tree);
            let mut c = CounterState::new(spec).unwrap();
            let mut rng = stream(3, 0);
            for _ in 0..horizon {
                c.feed(false, &mut rng).unwrap();
                assert!(c.noise_terms() <= spec.tree_levels());
            }
        }
    }

    #[test]
    fn tree_error_is_sum_of_cached_node_noises() {
        // Error at t must equal the sum of the noises of the nodes in t's
        // dyadic decomposition; each node's noise is fixed when it closes.
        let spec = CounterSpec::new(64, 1.0, Mechanism::Tree);
        let mut c = CounterState::new(spec).unwrap();
        let mut rng = stream(11, 0);
        let mut node_noise = std::collections::HashMap::new();
        for t in 1..=64usize {
            let released = c.feed(t % 2 == 0, &mut rng).unwrap();
            let i = t.trailing_zeros() as usize;
            if let Noise::Tree { noise, .. } = &c.noise {
                node_noise.insert((i, t >> i), noise[i]);
            }
            let mut err = 0.0;
            let mut rest = t;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                err += node_noise[&(j, rest >> j)];
                rest &= rest - 1;
            }
            let truth = c.true_prefix() as f64;
            assert!((released - truth - err).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let spec = CounterSpec::new(50, 0.5, Mechanism::Tree);
        let bits = vec![true; 50];
        assert_eq!(run(spec, &bits, 9), run(spec, &bits, 9));
        assert_ne!(run(spec, &bits, 9), run(spec, &bits, 10));
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(256), 8);
        assert_eq!(ceil_log2(257), 9);
        assert_eq!(CounterSpec::new(256, 1.0, Mechanism::Tree).tree_levels(), 9);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(CounterState::new(CounterSpec::new(0, 1.0, Mechanism::Tree)).is_err());
        assert!(CounterState::new(CounterSpec::new(5, 0.0, Mechanism::Naive)).is_err());
        assert!(CounterState::new(CounterSpec::new(5, 0.0, Mechanism::NoiseFree)).is_ok());
    }
}
