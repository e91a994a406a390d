use serde::{Deserialize, Serialize};

/// Two-sided miscoverage of the reported Hoeffding intervals.
pub const HOEFFDING_ALPHA: f64 = 0.05;

/// Half-width `sqrt(ln(2 / 0.05) / (2n))` of the 95% Hoeffding interval.
pub fn hoeffding_halfwidth(n: usize) -> f64 {
    ((2.0 / HOEFFDING_ALPHA).ln() / (2.0 * n as f64)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbEstimate {
    pub p_hat: f64,
    pub successes: usize,
    pub n_trials: usize,
    pub ci_halfwidth: f64,
}

impl ProbEstimate {
    pub fn from_counts(successes: usize, n_trials: usize) -> Self {
        assert!(n_trials > 0, "estimate needs at least one trial");
        Self {
            p_hat: successes as f64 / n_trials as f64,
            successes,
            n_trials,
            ci_halfwidth: hoeffding_halfwidth(n_trials),
        }
    }

    /// An exact value, for synthetic diagnostics.
    pub fn exact(p: f64) -> Self {
        Self {
            p_hat: p,
            successes: 0,
            n_trials: 0,
            ci_halfwidth: 0.0,
        }
    }

    pub fn lower(&self) -> f64 {
        (self.p_hat - self.ci_halfwidth).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        (self.p_hat + self.ci_halfwidth).min(1.0)
    }

    pub fn contains(&self, p: f64) -> bool {
        (self.p_hat - p).abs() <= self.ci_halfwidth
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        (self.p_hat - other.p_hat).abs() <= self.ci_halfwidth + other.ci_halfwidth
    }
}

/// Rejection-sampled `Pr[event | condition]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEstimate {
    /// Frequency among accepted trials; `n_trials` is the accepted count.
    pub estimate: ProbEstimate,
    pub accepted: usize,
    pub trials: usize,
    /// Unconditional frequency of the condition.
    pub condition: ProbEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_trials: usize,
}

impl MeanEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n > 0, "mean needs at least one sample");
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std_error,
            n_trials: n,
        }
    }
}
