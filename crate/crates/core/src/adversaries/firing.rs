//! Three-segment adversary against uniform firing learners over POINT_3.
//!
//! Inputs use the alphabet `0 = (3, 0)` and `1 = (x*, 1)` with target
//! `f* = I{· = x*}`. Each level turns round `l_i` into a `1`, splits
//! `[l_i, r_i]` into thirds and compares, conditionally on the good event
//! `G_i`, whether the learner outputs only `f*` from `r_i` on together with
//! only `f*` on the middle third, or from `r_i` on without it. The smaller
//! side is kept: left recursion keeps `G_i`, right recursion adds "not only
//! `f*` on the middle third" to it.

use serde::{Deserialize, Serialize};

use super::TieBreak;
use crate::error::{invalid, Error, Result};
use crate::game::{hoeffding_halfwidth, run_trials, GameSequence, ProbEstimate, Transcript, DEFAULT_MIN_ACCEPTED};
use crate::hypothesis::Hypothesis;
use crate::learners::LearnerFactory;
use crate::rng::derive_seed;

fn default_delta() -> f64 {
    1e-4
}

fn default_trials() -> usize {
    2000
}

fn default_min_accepted() -> usize {
    DEFAULT_MIN_ACCEPTED
}

fn default_x_star() -> usize {
    1
}

fn default_constant() -> f64 {
    8.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnStarvation {
    /// End the construction and record why.
    #[default]
    Stop,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiringConfig {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default = "default_min_accepted")]
    pub min_accepted: usize,
    #[serde(default)]
    pub tie_break: TieBreak,
    #[serde(default)]
    pub max_levels: Option<usize>,
    /// `x*`, one of 1 or 2.
    #[serde(default = "default_x_star")]
    pub x_star: usize,
    /// `c` in the `1/2 + c i δ` marginal check.
    #[serde(default = "default_constant")]
    pub marginal_constant: f64,
    #[serde(default)]
    pub on_starvation: OnStarvation,
}

impl Default for FiringConfig {
    fn default() -> Self {
        Self {
            delta: default_delta(),
            n_trials: default_trials(),
            min_accepted: DEFAULT_MIN_ACCEPTED,
            tie_break: TieBreak::Left,
            max_levels: None,
            x_star: 1,
            marginal_constant: default_constant(),
            on_starvation: OnStarvation::Stop,
        }
    }
}

impl FiringConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.delta) {
            return Err(invalid(format!("delta must lie in [0, 1), got {}", self.delta)));
        }
        if self.n_trials < 100 {
            return Err(invalid(format!("n_trials must be at least 100, got {}", self.n_trials)));
        }
        if self.min_accepted == 0 {
            return Err(invalid("min_accepted must be at least 1"));
        }
        if !(self.x_star == 1 || self.x_star == 2) {
            return Err(invalid(format!("x_star must be 1 or 2, got {}", self.x_star)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiringLevel {
    pub level: usize,
    pub l: usize,
    pub r: usize,
    pub lm: usize,
    pub rm: usize,
    /// Middle thirds whose "not only f*" clauses make up `G_i`.
    pub g_intervals: Vec<(usize, usize)>,
    /// Unconditional frequency of `G_i`.
    pub pr_g: ProbEstimate,
    pub accepted: usize,
    /// `Pr_i[only f* on [r_i, T] and only f* on [lm_i, rm_i]]` after insertion.
    pub a: ProbEstimate,
    /// `Pr_i[only f* on [r_i, T] and not only f* on [lm_i, rm_i]]` after insertion.
    pub b: ProbEstimate,
    /// `Pr_i[f̂_{l_i} = f*]`, the prediction made for the inserted point.
    pub marginal: ProbEstimate,
    pub marginal_bound: f64,
    pub marginal_ok: bool,
    pub branch: Branch,
    pub ambiguous: bool,
    pub inserted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    /// `rm - lm < √T` for the next level.
    SegmentTooShort { level: usize, width: usize },
    LevelCap { levels: usize },
    /// Too few trials satisfied `G_i`; the level was not applied.
    Starved { level: usize, accepted: usize, required: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiringDiagnostics {
    pub horizon: usize,
    pub x_star: usize,
    pub delta: f64,
    /// `max(δ, 1/T²)`.
    pub delta_effective: f64,
    pub sqrt_horizon: f64,
    pub n_trials: usize,
    pub seed: u64,
    /// `Pr[only f* from r_0 on]` on the all-zero input.
    pub start_only_target: ProbEstimate,
    pub levels: Vec<FiringLevel>,
    pub stop: StopReason,
}

impl FiringDiagnostics {
    pub fn marginals_ok(&self) -> bool {
        self.levels.iter().all(|l| l.marginal_ok)
    }

    pub fn right_branches(&self) -> usize {
        self.levels.iter().filter(|l| l.branch == Branch::Right).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "i,l,r,lm,rm,pr_g,accepted,a,b,marginal,marginal_bound,branch,ambiguous,ci\n",
        );
        for lv in &self.levels {
            let branch = match lv.branch {
                Branch::Left => "left",
                Branch::Right => "right",
            };
            out.push_str(&format!(
                "{},{},{},{},{},{:.6},{},{:.6},{:.6},{:.6},{:.6},{branch},{},{:.6}\n",
                lv.level,
                lv.l,
                lv.r,
                lv.lm,
                lv.rm,
                lv.pr_g.p_hat,
                lv.accepted,
                lv.a.p_hat,
                lv.b.p_hat,
                lv.marginal.p_hat,
                lv.marginal_bound,
                lv.ambiguous,
                lv.a.ci_halfwidth,
            ));
        }
        out
    }
}

fn only_target(tr: &Transcript, target: &Hypothesis, from: usize, to: usize) -> bool {
    (from..=to).all(|t| tr.predictor_equals(t, target))
}

fn thirds(l: usize, r: usize) -> (usize, usize) {
    (l + (r - l) / 3, l + 2 * (r - l) / 3)
}

struct Row {
    good: bool,
    a: bool,
    b: bool,
    hit: bool,
}

pub fn build_firing_adversary_sequence(
    factory: &dyn LearnerFactory,
    horizon: usize,
    config: &FiringConfig,
    seed: u64,
) -> Result<(GameSequence, FiringDiagnostics)> {
    config.validate()?;
    if factory.domain_size() != 3 {
        return Err(invalid(format!(
            "the firing adversary plays over POINT_3, learner works over [{}]",
            factory.domain_size()
        )));
    }
    let sqrt_t = (horizon as f64).sqrt();
    let r0 = horizon / 2;
    if r0 < 2 || ((r0 - 1) / 3) as f64 + 1.0 < sqrt_t {
        return Err(invalid(format!(
            "horizon {horizon} too small: the first middle third must span at least sqrt(T) = {sqrt_t:.1} rounds"
        )));
    }
    let target = Hypothesis::indicator(3, config.x_star);
    let delta_eff = config.delta.max(1.0 / (horizon as f64).powi(2));
    let mut points = vec![3usize; horizon];
    let mut seq = GameSequence::new(target.clone(), points.clone())?;

    let start = run_trials(factory, &seq, config.n_trials, derive_seed(seed, 0), |tr| {
        only_target(tr, &target, r0, horizon)
    })?;
    let start_only_target = ProbEstimate::from_counts(start.iter().filter(|&&x| x).count(), config.n_trials);

    let (mut l, mut r) = (1usize, r0);
    let mut g: Vec<(usize, usize)> = Vec::new();
    let mut levels = Vec::new();
    let cap = config.max_levels.unwrap_or(usize::MAX);
    let stop = loop {
        let i = levels.len();
        if i >= cap {
            break StopReason::LevelCap { levels: i };
        }
        let (lm, rm) = thirds(l, r);
        if ((rm - lm) as f64) < sqrt_t || l >= lm {
            break StopReason::SegmentTooShort { level: i, width: rm - lm };
        }
        points[l - 1] = config.x_star;
        let candidate = GameSequence::new(target.clone(), points.clone())?;
        let rows = run_trials(factory, &candidate, config.n_trials, derive_seed(seed, i as u64 + 1), |tr| {
            let good = g.iter().all(|&(a, b)| !only_target(tr, &target, a, b));
            let tail = only_target(tr, &target, r, horizon);
            let middle = only_target(tr, &target, lm, rm);
            Row {
                good,
                a: good && tail && middle,
                b: good && tail && !middle,
                hit: good && tr.predictor_equals(l, &target),
            }
        })?;
        let accepted = rows.iter().filter(|x| x.good).count();
        if accepted < config.min_accepted {
            points[l - 1] = 3;
            if config.on_starvation == OnStarvation::Error || i == 0 {
                return Err(Error::InsufficientSamples {
                    accepted,
                    trials: config.n_trials,
                    required: config.min_accepted,
                    level: Some(i),
                });
            }
            break StopReason::Starved {
                level: i,
                accepted,
                required: config.min_accepted,
            };
        }
        seq = candidate;
        let count = |f: fn(&Row) -> bool| rows.iter().filter(|x| f(x)).count();
        let a = ProbEstimate::from_counts(count(|x| x.a), accepted);
        let b = ProbEstimate::from_counts(count(|x| x.b), accepted);
        let marginal = ProbEstimate::from_counts(count(|x| x.hit), accepted);
        let marginal_bound = 0.5 + config.marginal_constant * i as f64 * delta_eff + 3.0 * hoeffding_halfwidth(accepted);
        let ambiguous = a.overlaps(&b);
        let left = if ambiguous {
            match config.tie_break {
                TieBreak::Left => true,
                TieBreak::Right => false,
                TieBreak::Estimate => a.p_hat <= b.p_hat,
            }
        } else {
            a.p_hat < b.p_hat
        };
        let branch = if left { Branch::Left } else { Branch::Right };
        levels.push(FiringLevel {
            level: i,
            l,
            r,
            lm,
            rm,
            g_intervals: g.clone(),
            pr_g: ProbEstimate::from_counts(accepted, config.n_trials),
            accepted,
            a,
            b,
            marginal,
            marginal_bound,
            marginal_ok: marginal.p_hat <= marginal_bound,
            branch,
            ambiguous,
            inserted: l,
        });
        if left {
            l += 1;
            r = lm;
        } else {
            g.push((lm, rm));
            l = rm;
        }
    };
    let diagnostics = FiringDiagnostics {
        horizon,
        x_star: config.x_star,
        delta: config.delta,
        delta_effective: delta_eff,
        sqrt_horizon: sqrt_t,
        n_trials: config.n_trials,
        seed,
        start_only_target,
        levels,
        stop,
    };
    Ok((seq, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{FiringSchedule, UniformFiringFactory};

    fn quick() -> FiringConfig {
        FiringConfig {
            n_trials: 400,
            ..FiringConfig::default()
        }
    }

    #[test]
    fn thirds_follow_definition() {
        assert_eq!(thirds(1, 405), (135, 270));
        assert_eq!(thirds(10, 20), (13, 16));
    }

    #[test]
    fn structure_of_a_build() {
        let fac = UniformFiringFactory::new(FiringSchedule::Linear { kappa: 20.0 }).unwrap();
        let (seq, diag) = build_firing_adversary_sequence(&fac, 810, &quick(), 3).unwrap();
        assert_eq!(diag.start_only_target.p_hat, 0.0);
        assert!(!diag.levels.is_empty());
        let ones: Vec<usize> = (1..=810).filter(|&t| seq.points()[t - 1] == 1).collect();
        let inserted: Vec<usize> = diag.levels.iter().map(|l| l.inserted).collect();
        assert_eq!(ones, inserted);
        for w in diag.levels.windows(2) {
            assert!(w[1].l >= w[0].l && w[1].r <= w[0].r);
        }
        for lv in &diag.levels {
            assert_eq!(lv.lm, lv.l + (lv.r - lv.l) / 3);
            assert_eq!(lv.rm, lv.l + 2 * (lv.r - lv.l) / 3);
            assert!((lv.rm - lv.lm) as f64 >= diag.sqrt_horizon);
        }
        let rights = diag.levels.iter().filter(|l| l.branch == Branch::Right).count();
        let last = diag.levels.last().unwrap();
        let clauses = last.g_intervals.len() + (last.branch == Branch::Right) as usize;
        assert_eq!(clauses, rights);
        assert_eq!(diag.to_csv().lines().count(), diag.levels.len() + 1);
    }

    #[test]
    fn immediate_firing_collapses_the_good_event() {
        let fac = UniformFiringFactory::new(FiringSchedule::Linear { kappa: 1.0 }).unwrap();
        let (_, diag) = build_firing_adversary_sequence(&fac, 7290, &quick(), 1).unwrap();
        let pr: Vec<f64> = diag.levels.iter().map(|l| l.pr_g.p_hat).collect();
        assert!(pr.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(pr[0], 1.0);
        assert!(pr.last().unwrap() < &0.6, "{pr:?}");
    }

    #[test]
    fn too_short_horizon_rejected() {
        let fac = UniformFiringFactory::new(FiringSchedule::Linear { kappa: 20.0 }).unwrap();
        assert!(build_firing_adversary_sequence(&fac, 20, &quick(), 0).is_err());
    }
}
