use serde::{Deserialize, Serialize};

use super::{CounterSpec, CounterState};
use crate::error::{invalid, Result};
use crate::game::ProbEstimate;
use crate::par::map_indices;
use crate::rng::{stream, SimRng};

/// `8 (log₂T + 1)^1.5 / ε`, the frozen accuracy threshold for the tree
/// mechanism; holds for at least 90% of runs at every tested horizon.
pub fn polylog_threshold(horizon: usize, epsilon: f64) -> f64 {
    8.0 * ((horizon as f64).log2() + 1.0).powf(1.5) / epsilon
}

fn check_stream(spec: &CounterSpec, bits: &[bool]) -> Result<()> {
    spec.validate()?;
    if bits.len() > spec.horizon {
        return Err(invalid(format!(
            "stream of length {} exceeds counter horizon {}",
            bits.len(),
            spec.horizon
        )));
    }
    Ok(())
}

fn run_max_error(spec: &CounterSpec, bits: &[bool], rng: &mut SimRng) -> Result<f64> {
    let mut c = CounterState::new(*spec)?;
    let mut worst = 0f64;
    for &b in bits {
        let released = c.feed(b, rng)?;
        worst = worst.max((released - c.true_prefix() as f64).abs());
    }
    Ok(worst)
}

/// `max_t |released_t - Σ_{i≤t} bits_i|` for one run.
pub fn max_error(spec: &CounterSpec, bits: &[bool], rng: &mut SimRng) -> Result<f64> {
    check_stream(spec, bits)?;
    run_max_error(spec, bits, rng)
}

/// One max-error sample per trial; trial `i` uses stream `(seed, i)`.
pub fn max_error_samples(spec: &CounterSpec, bits: &[bool], n_trials: usize, seed: u64) -> Result<Vec<f64>> {
    check_stream(spec, bits)?;
    map_indices(n_trials, |i| run_max_error(spec, bits, &mut stream(seed, i as u64)))
        .into_iter()
        .collect()
}

/// Empirical `Pr[max error ≤ α]`.
pub fn accuracy_check(spec: &CounterSpec, bits: &[bool], n_trials: usize, seed: u64) -> Result<ProbEstimate> {
    if n_trials == 0 {
        return Err(invalid("n_trials must be at least 1"));
    }
    let errs = max_error_samples(spec, bits, n_trials, seed)?;
    let ok = errs.iter().filter(|&&e| e <= spec.alpha).count();
    Ok(ProbEstimate::from_counts(ok, n_trials))
}

/// Empirical `q`-quantile of `max_t released_t` on the all-zero stream of
/// length `spec.horizon`: the smallest threshold a silent counter crosses
/// with probability about `1 - q`.
pub fn zero_stream_peak_quantile(spec: &CounterSpec, q: f64, n_trials: usize, seed: u64) -> Result<f64> {
    spec.validate()?;
    if !(0.0..=1.0).contains(&q) || n_trials == 0 {
        return Err(invalid("quantile needs q in [0, 1] and n_trials >= 1"));
    }
    let mut peaks: Vec<f64> = map_indices(n_trials, |i| -> Result<f64> {
        let mut rng = stream(seed, i as u64);
        let mut c = CounterState::new(*spec)?;
        let mut peak = f64::NEG_INFINITY;
        for _ in 0..spec.horizon {
            peak = peak.max(c.feed(false, &mut rng)?);
        }
        Ok(peak)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    peaks.sort_by(f64::total_cmp);
    let idx = ((q * n_trials as f64).ceil() as usize).clamp(1, n_trials) - 1;
    Ok(peaks[idx])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub true_prefix: u64,
    pub released: f64,
}

pub fn trace(spec: &CounterSpec, bits: &[bool], seed: u64) -> Result<Vec<TraceRow>> {
    check_stream(spec, bits)?;
    let mut rng = stream(seed, 0);
    let mut c = CounterState::new(*spec)?;
    bits.iter()
        .map(|&b| {
            let released = c.feed(b, &mut rng)?;
            Ok(TraceRow {
                t: c.round(),
                true_prefix: c.true_prefix(),
                released,
            })
        })
        .collect()
}

/// `t,true_prefix,released` with a header row.
pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("t,true_prefix,released\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.t, r.true_prefix, r.released));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counters::Mechanism;

    fn median(mut xs: Vec<f64>) -> f64 {
        xs.sort_by(f64::total_cmp);
        xs[xs.len() / 2]
    }

    #[test]
    fn noise_free_is_always_accurate() {
        let spec = CounterSpec::noise_free(20);
        let bits: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        assert_eq!(accuracy_check(&spec, &bits, 10, 0).unwrap().p_hat, 1.0);
    }

    #[test]
    fn golden_threshold_at_256() {
        let spec = CounterSpec::new(256, 1.0, Mechanism::Tree).with_alpha(polylog_threshold(256, 1.0));
        assert!((spec.alpha - 216.0).abs() < 1e-9);
        let bits = vec![true; 256];
        assert!(accuracy_check(&spec, &bits, 200, 1).unwrap().p_hat >= 0.9);
    }

    #[test]
    fn naive_error_grows_faster_than_tree() {
        // the tree's advantage is asymptotic: at these horizons the naive
        // baseline is still more accurate, but its error grows like sqrt(T)
        let med = |m, t: usize| {
            median(max_error_samples(&CounterSpec::new(t, 1.0, m), &vec![false; t], 200, 4).unwrap())
        };
        let naive = med(Mechanism::Naive, 1024) / med(Mechanism::Naive, 64);
        let tree = med(Mechanism::Tree, 1024) / med(Mechanism::Tree, 64);
        assert!(naive > 3.0 && tree < naive, "naive x{naive:.2}, tree x{tree:.2}");
    }

    #[test]
    fn median_error_grows_slowly() {
        let m64 = median(max_error_samples(&CounterSpec::new(64, 1.0, Mechanism::Tree), &[false; 64], 200, 2).unwrap());
        let m1024 =
            median(max_error_samples(&CounterSpec::new(1024, 1.0, Mechanism::Tree), &[false; 1024], 200, 2).unwrap());
        assert!(m1024 < 4.0 * m64);
    }

    #[test]
    fn trace_csv_shape() {
        let rows = trace(&CounterSpec::noise_free(3), &[true, false, true], 0).unwrap();
        assert_eq!(trace_csv(&rows), "t,true_prefix,released\n1,1,1\n2,1,1\n3,2,2\n");
    }

    #[test]
    fn stream_longer_than_horizon_rejected() {
        assert!(accuracy_check(&CounterSpec::noise_free(2), &[true; 3], 5, 0).is_err());
    }

    #[test]
    fn peak_quantile_is_monotone_in_q() {
        let spec = CounterSpec::new(64, 1.0, Mechanism::Tree);
        let lo = zero_stream_peak_quantile(&spec, 0.5, 200, 3).unwrap();
        let hi = zero_stream_peak_quantile(&spec, 0.99, 200, 3).unwrap();
        assert!(lo <= hi);
    }
}
