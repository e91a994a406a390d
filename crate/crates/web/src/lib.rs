//! Browser bindings: counter traces, adversary construction and mistake sweeps.
//! Every export takes plain numbers or a JSON learner spec and returns JSON.

use std::sync::Arc;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use privlearn::adversaries::{build_case2_sequence, verify_diagnostics, CaseIIConfig};
use privlearn::counters::{polylog_threshold, trace, CounterSpec, Mechanism, TraceRow};
use privlearn::game::expected_mistakes;
use privlearn::hypothesis::{find_distinguishing_tuple, make_point_class};
use privlearn::learners::LearnerConfig;
use privlearn::rng::derive_seed;

const MAX_HORIZON: usize = 1 << 14;
const MAX_TRIALS: usize = 5000;

#[derive(Serialize)]
pub struct CounterTrace {
    pub mechanism: Mechanism,
    pub epsilon: f64,
    pub threshold: f64,
    pub max_error: f64,
    pub rows: Vec<TraceRow>,
}

#[derive(Serialize)]
pub struct LevelSummary {
    pub level: usize,
    pub l: usize,
    pub r: usize,
    pub m: Option<usize>,
    pub p_hat: f64,
    pub q_hat: f64,
    pub branch: Option<usize>,
    pub ambiguous: bool,
}

#[derive(Serialize)]
pub struct BuildSummary {
    pub horizon: usize,
    pub effective_horizon: usize,
    pub k: usize,
    pub x_eq: usize,
    pub x_dif: usize,
    pub points: Vec<usize>,
    pub levels: Vec<LevelSummary>,
    pub checks_passed: usize,
    pub checks_failed: usize,
    pub mean_mistakes: f64,
    pub std_error: f64,
}

#[derive(Serialize)]
pub struct SweepPoint {
    pub horizon: usize,
    pub levels: usize,
    pub mean_mistakes: f64,
    pub std_error: f64,
}

fn check(name: &str, v: usize, lo: usize, hi: usize) -> Result<usize, String> {
    if v < lo || v > hi {
        return Err(format!("{name} must be in {lo}..={hi}, got {v}"));
    }
    Ok(v)
}

fn parse_mechanism(s: &str) -> Result<Mechanism, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown mechanism {s:?}"))
}

fn parse_learner(json: &str) -> Result<LearnerConfig, String> {
    serde_json::from_str(json).map_err(|e| format!("learner spec: {e}"))
}

/// Released prefix sums of a counter fed `ones` ones followed by zeros.
pub fn counter_trace_native(
    mechanism: &str,
    horizon: usize,
    ones: usize,
    epsilon: f64,
    seed: u64,
) -> Result<CounterTrace, String> {
    let horizon = check("horizon", horizon, 1, MAX_HORIZON)?;
    let mechanism = parse_mechanism(mechanism)?;
    let spec = CounterSpec::new(horizon, epsilon, mechanism);
    let bits: Vec<bool> = (0..horizon).map(|t| t < ones).collect();
    let rows = trace(&spec, &bits, seed).map_err(|e| e.to_string())?;
    let max_error = rows
        .iter()
        .map(|r| (r.released - r.true_prefix as f64).abs())
        .fold(0.0, f64::max);
    Ok(CounterTrace {
        mechanism,
        epsilon,
        threshold: polylog_threshold(horizon, epsilon),
        max_error,
        rows,
    })
}

fn build_native(
    learner: &LearnerConfig,
    n: usize,
    horizon: usize,
    n_trials: usize,
    eval_trials: usize,
    seed: u64,
) -> Result<BuildSummary, String> {
    let n = check("domain size", n, 2, 64)?;
    let horizon = check("horizon", horizon, 3, MAX_HORIZON)?;
    let n_trials = check("trials", n_trials, 100, MAX_TRIALS)?;
    let eval_trials = check("evaluation trials", eval_trials, 10, MAX_TRIALS)?;
    let err = |e: privlearn::Error| e.to_string();
    let class = Arc::new(make_point_class(n).map_err(err)?);
    let tuple = find_distinguishing_tuple(&class).ok_or("the class has no distinguishing tuple")?;
    let fac = learner.build(class, horizon, derive_seed(seed, 1)).map_err(err)?;
    let config = CaseIIConfig {
        n_trials,
        ..CaseIIConfig::default()
    };
    let (seq, diag) = build_case2_sequence(fac.as_ref(), &tuple, horizon, &config, derive_seed(seed, 2)).map_err(err)?;
    let report = verify_diagnostics(&diag, config.delta);
    let est = expected_mistakes(fac.as_ref(), &seq, eval_trials, derive_seed(seed, 3)).map_err(err)?;
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    Ok(BuildSummary {
        horizon,
        effective_horizon: diag.effective_horizon,
        k: diag.k,
        x_eq: tuple.x_eq,
        x_dif: tuple.x_dif,
        points: seq.points().to_vec(),
        levels: diag
            .levels
            .iter()
            .map(|lv| LevelSummary {
                level: lv.level,
                l: lv.l,
                r: lv.r,
                m: lv.m,
                p_hat: lv.p_hat.p_hat,
                q_hat: lv.q_hat.p_hat,
                branch: lv.branch,
                ambiguous: lv.ambiguous,
            })
            .collect(),
        checks_passed: report.checks.len() - failed,
        checks_failed: failed,
        mean_mistakes: est.mean,
        std_error: est.std_error,
    })
}

/// Adversary construction against a learner on the point class of size `n`.
pub fn build_case2_native(
    learner_json: &str,
    n: usize,
    horizon: usize,
    n_trials: usize,
    seed: u64,
) -> Result<BuildSummary, String> {
    build_native(&parse_learner(learner_json)?, n, horizon, n_trials, n_trials, seed)
}

/// Expected mistakes against the adversary at horizons `2^j - 1` for `j` in `3..=max_log`.
pub fn mistakes_sweep_native(
    learner_json: &str,
    max_log: u32,
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>, String> {
    let learner = parse_learner(learner_json)?;
    let max_log = check("max_log", max_log as usize, 3, 12)? as u32;
    (3..=max_log)
        .map(|j| {
            let t = (1usize << j) - 1;
            let b = build_native(&learner, 3, t, trials, trials, derive_seed(seed, j as u64))?;
            Ok(SweepPoint {
                horizon: t,
                levels: b.levels.len(),
                mean_mistakes: b.mean_mistakes,
                std_error: b.std_error,
            })
        })
        .collect()
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    let v = r.map_err(|e| JsValue::from_str(&e))?;
    serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn counter_trace(mechanism: &str, horizon: u32, ones: u32, epsilon: f64, seed: u32) -> Result<String, JsValue> {
    to_js(counter_trace_native(mechanism, horizon as usize, ones as usize, epsilon, seed as u64))
}

#[wasm_bindgen]
pub fn build_case2(learner_json: &str, n: u32, horizon: u32, n_trials: u32, seed: u32) -> Result<String, JsValue> {
    to_js(build_case2_native(learner_json, n as usize, horizon as usize, n_trials as usize, seed as u64))
}

#[wasm_bindgen]
pub fn mistakes_sweep(learner_json: &str, max_log: u32, trials: u32, seed: u32) -> Result<String, JsValue> {
    to_js(mistakes_sweep_native(learner_json, max_log, trials as usize, seed as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_free_trace_is_exact() {
        let tr = counter_trace_native("noise_free", 16, 5, 1.0, 1).unwrap();
        assert_eq!(tr.rows.len(), 16);
        assert_eq!(tr.max_error, 0.0);
        assert_eq!(tr.rows[15].true_prefix, 5);
    }

    #[test]
    fn bad_inputs_are_reported() {
        assert!(counter_trace_native("bogus", 16, 0, 1.0, 1).is_err());
        assert!(counter_trace_native("tree", 0, 0, 1.0, 1).is_err());
        assert!(build_case2_native("{\"kind\":\"nope\"}", 3, 31, 100, 1).is_err());
    }

    #[test]
    fn zero_learner_build_pays_one_mistake_per_level() {
        let b = build_case2_native(r#"{"kind":"fixed","bits":"000"}"#, 3, 31, 100, 7).unwrap();
        assert_eq!(b.k, 5);
        assert_eq!(b.levels.len(), 5);
        assert_eq!(b.checks_failed, 0);
        assert_eq!(b.mean_mistakes, 5.0);
        assert_eq!(b.points.len(), 31);
    }

    #[test]
    fn sweep_covers_requested_horizons() {
        let pts = mistakes_sweep_native(r#"{"kind":"fixed","bits":"000"}"#, 5, 100, 3).unwrap();
        let hs: Vec<usize> = pts.iter().map(|p| p.horizon).collect();
        assert_eq!(hs, vec![7, 15, 31]);
        assert!(pts.iter().all(|p| p.mean_mistakes == p.levels as f64));
    }
}
