//! Recursive splitting adversary against concentrated learners.
//!
//! Positions are grouped into blocks of `d` rounds. Starting from the
//! all-`x_eq` sequence, level `i` overwrites block `l_i` with `x_dif`, then
//! splits `[l_i + 1, r_i]` into `s` equal parts and recurses into the part
//! where the learner is least likely to first leave `f0(x_dif)`. With
//! `s = 2, d = 1` this is the binary construction; `d > 1` covers small ε
//! and `s > 2` large ε.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::game::{run_trials, GameSequence, ProbEstimate};
use crate::hypothesis::{DistinguishingTuple, TupleSummary};
use crate::learners::LearnerFactory;
use crate::rng::derive_seed;

/// `ln(3/2)`, the privacy level of the base construction.
pub const EPSILON_0: f64 = 0.405_465_108_108_164_4;

/// Which candidate to take when the estimated probabilities cannot be told
/// apart by their confidence intervals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    Left,
    Right,
    /// Smallest point estimate regardless of overlap.
    Estimate,
}

fn default_epsilon() -> f64 {
    EPSILON_0
}

fn default_delta() -> f64 {
    1e-4
}

fn default_trials() -> usize {
    2000
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseIIConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Trials per probability batch.
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default)]
    pub tie_break: TieBreak,
    #[serde(default)]
    pub max_levels: Option<usize>,
    /// Only use the first `exp(1/(32δ))` rounds.
    #[serde(default = "yes")]
    pub effective_horizon_cap: bool,
}

impl Default for CaseIIConfig {
    fn default() -> Self {
        Self {
            epsilon: EPSILON_0,
            delta: default_delta(),
            n_trials: default_trials(),
            tie_break: TieBreak::Left,
            max_levels: None,
            effective_horizon_cap: true,
        }
    }
}

impl CaseIIConfig {
    pub fn new(epsilon: f64, delta: f64, n_trials: usize) -> Self {
        Self {
            epsilon,
            delta,
            n_trials,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(invalid(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(invalid(format!("delta must lie in [0, 1), got {}", self.delta)));
        }
        if self.n_trials < 100 {
            return Err(invalid(format!("n_trials must be at least 100, got {}", self.n_trials)));
        }
        if self.max_levels == Some(0) {
            return Err(invalid("max_levels must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Case2,
    SmallEps,
    LargeEps,
}

/// State of one level. `p_hat .. q_prime` are measured on the sequence before
/// this level's insertion, `parts` on the sequence after it. Positions are in
/// blocks except `inserted`, which lists rounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelDiagnostics {
    pub level: usize,
    pub l: usize,
    pub r: usize,
    /// Last block of the first part; absent when the segment is not split.
    pub m: Option<usize>,
    pub p_hat: ProbEstimate,
    pub q_hat: ProbEstimate,
    pub p_prime: ProbEstimate,
    pub q_prime: ProbEstimate,
    pub parts: Vec<ProbEstimate>,
    /// 1-based part recursed into.
    pub branch: Option<usize>,
    pub ambiguous: bool,
    pub inserted: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseIIDiagnostics {
    pub variant: Variant,
    pub tuple: TupleSummary,
    pub epsilon: f64,
    pub delta: f64,
    /// Multiplier turning `δ` into the per-level additive slack.
    pub delta_factor: f64,
    pub delta_effective: f64,
    /// Rounds per block.
    pub unit: usize,
    /// Parts per split.
    pub parts: usize,
    /// Per-level contraction `e^{dε} / s` of the bad-event probability.
    pub recursion_factor: f64,
    pub horizon: usize,
    /// Rounds covered by the construction, `d (s^k - 1) / (s - 1)`.
    pub effective_horizon: usize,
    pub horizon_cap: Option<f64>,
    /// The `exp(1/(32δ))` cap was binding.
    pub truncated: bool,
    /// Levels the layout supports.
    pub k: usize,
    pub n_trials: usize,
    pub seed: u64,
    pub levels: Vec<LevelDiagnostics>,
    /// `Pr[f̂_t(x_dif) = f0(x_dif) for all t up to the last insertion]` on the final sequence.
    pub final_p: ProbEstimate,
}

impl CaseIIDiagnostics {
    /// `n_i`: blocks in the level-`i` segment, so that `r_i - l_i = n_i - 1`.
    pub fn segment_blocks(&self, level: usize) -> usize {
        let mut n = blocks_for(self.parts, self.k);
        for _ in 0..level {
            n = (n - 1) / self.parts;
        }
        n
    }

    pub fn inserted_count(&self) -> usize {
        self.levels.iter().map(|l| l.inserted.len()).sum()
    }

    /// One row per level. Missing values are empty cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "i,l,r,m,p_hat,q_hat,p_prime,q_prime,branch,ambiguous,p_ci,q_ci,first_inserted,last_inserted\n",
        );
        for lv in &self.levels {
            let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{:.6},{:.6},{},{}\n",
                lv.level,
                lv.l,
                lv.r,
                opt(lv.m),
                lv.p_hat.p_hat,
                lv.q_hat.p_hat,
                lv.p_prime.p_hat,
                lv.q_prime.p_hat,
                opt(lv.branch),
                lv.ambiguous,
                lv.p_hat.ci_halfwidth,
                lv.q_hat.ci_halfwidth,
                opt(lv.inserted.first().copied()),
                opt(lv.inserted.last().copied()),
            ));
        }
        out
    }
}

fn blocks_for(s: usize, k: usize) -> usize {
    (0..k).fold(0, |acc, _| acc * s + 1)
}

/// First round at which the learner leaves `f0(x_dif)` at `x_dif`, per trial.
fn first_deviations(
    factory: &dyn LearnerFactory,
    seq: &GameSequence,
    tuple: &DistinguishingTuple,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<Option<usize>>> {
    let dev = !tuple.f0.eval(tuple.x_dif);
    let horizon = seq.horizon();
    run_trials(factory, seq, n_trials, seed, |tr| tr.first_with(tuple.x_dif, dev, 1, horizon))
}

struct Samples(Vec<Option<usize>>);

impl Samples {
    /// `Pr[no deviation in [1, a] and one in [a + 1, b]]`.
    fn window(&self, a: usize, b: usize) -> ProbEstimate {
        let hits = self.0.iter().filter(|tau| tau.is_some_and(|t| t > a && t <= b)).count();
        ProbEstimate::from_counts(hits, self.0.len())
    }

    /// `Pr[no deviation in [1, a]]`.
    fn clean_through(&self, a: usize) -> ProbEstimate {
        let hits = self.0.iter().filter(|tau| tau.is_none_or(|t| t > a)).count();
        ProbEstimate::from_counts(hits, self.0.len())
    }
}

struct Stats {
    p: ProbEstimate,
    q: ProbEstimate,
    p_prime: ProbEstimate,
    q_prime: ProbEstimate,
}

/// `p_i, q_i, p′_i, q′_i` for the segment `[l, r]` of blocks of `d` rounds.
fn stats(samples: &Samples, l: usize, r: usize, d: usize) -> Stats {
    Stats {
        p: samples.clean_through((l - 1) * d),
        q: samples.window((l - 1) * d, r * d),
        p_prime: samples.clean_through(l * d),
        q_prime: samples.window(l * d, r * d),
    }
}

fn choose(parts: &[ProbEstimate], tie_break: TieBreak) -> (usize, bool) {
    let best = (0..parts.len())
        .min_by(|&a, &b| parts[a].p_hat.total_cmp(&parts[b].p_hat).then(a.cmp(&b)))
        .expect("at least one part");
    let close: Vec<usize> = (0..parts.len()).filter(|&j| parts[j].overlaps(&parts[best])).collect();
    if close.len() <= 1 {
        return (best, false);
    }
    let pick = match tie_break {
        TieBreak::Left => close[0],
        TieBreak::Right => *close.last().unwrap(),
        TieBreak::Estimate => best,
    };
    (pick, true)
}

pub(crate) struct Layout {
    pub d: usize,
    pub s: usize,
    pub variant: Variant,
    pub delta_factor: f64,
}

pub(crate) fn build_recursive(
    factory: &dyn LearnerFactory,
    tuple: &DistinguishingTuple,
    horizon: usize,
    config: &CaseIIConfig,
    layout: Layout,
    seed: u64,
) -> Result<(GameSequence, CaseIIDiagnostics)> {
    config.validate()?;
    let Layout {
        d,
        s,
        variant,
        delta_factor,
    } = layout;
    if !crate::hypothesis::is_distinguishing(&tuple.f0, &tuple.f1, tuple.x_eq, tuple.x_dif) {
        return Err(invalid("tuple is not distinguishing"));
    }
    if factory.domain_size() != tuple.domain_size() {
        return Err(invalid(format!(
            "learner works over [{}] but the tuple is over [{}]",
            factory.domain_size(),
            tuple.domain_size()
        )));
    }
    if horizon < 3 {
        return Err(invalid(format!("horizon must be at least 3, got {horizon}")));
    }
    let horizon_cap = (config.effective_horizon_cap && config.delta > 0.0).then(|| (1.0 / (32.0 * config.delta)).exp());
    let usable = match horizon_cap {
        Some(cap) if cap < horizon as f64 => cap.floor() as usize,
        _ => horizon,
    };
    let truncated = usable < horizon;
    let mut k = 0;
    while d * blocks_for(s, k + 1) <= usable {
        k += 1;
    }
    if k < 2 {
        return Err(invalid(format!(
            "{usable} usable rounds are too few for two levels of {s} parts with {d} points per level"
        )));
    }
    let n0 = blocks_for(s, k);
    let levels_to_run = config.max_levels.map_or(k, |m| m.min(k));
    let recursion_factor = (d as f64 * config.epsilon).exp() / s as f64;

    let mut points = vec![tuple.x_eq; horizon];
    let mut seq = GameSequence::new(tuple.f1.clone(), points.clone())?;
    let mut samples = Samples(first_deviations(factory, &seq, tuple, config.n_trials, derive_seed(seed, 0))?);
    let (mut l, mut r) = (1usize, n0);
    let mut n = n0;
    let mut current = stats(&samples, l, r, d);
    let mut levels = Vec::with_capacity(levels_to_run);

    for i in 0..levels_to_run {
        let inserted: Vec<usize> = ((l - 1) * d + 1..=l * d).collect();
        for &t in &inserted {
            points[t - 1] = tuple.x_dif;
        }
        seq = GameSequence::new(tuple.f1.clone(), points.clone())?;
        samples = Samples(first_deviations(
            factory,
            &seq,
            tuple,
            config.n_trials,
            derive_seed(seed, i as u64 + 1),
        )?);
        let mut diag = LevelDiagnostics {
            level: i,
            l,
            r,
            m: None,
            p_hat: current.p,
            q_hat: current.q,
            p_prime: current.p_prime,
            q_prime: current.q_prime,
            parts: Vec::new(),
            branch: None,
            ambiguous: false,
            inserted,
        };
        if n > 1 {
            let part = (n - 1) / s;
            let starts: Vec<usize> = (0..s).map(|j| l + 1 + j * part).collect();
            diag.parts = starts
                .iter()
                .map(|&a| samples.window((a - 1) * d, (a + part - 1) * d))
                .collect();
            let (j, ambiguous) = choose(&diag.parts, config.tie_break);
            diag.m = Some(l + part);
            diag.branch = Some(j + 1);
            diag.ambiguous = ambiguous;
            l = starts[j];
            r = starts[j] + part - 1;
            n = part;
            current = stats(&samples, l, r, d);
        }
        let split = diag.branch.is_some();
        levels.push(diag);
        if !split {
            break;
        }
    }
    let last = levels.last().and_then(|lv| lv.inserted.last().copied()).unwrap_or(0);
    let final_p = samples.clean_through(last);
    let diagnostics = CaseIIDiagnostics {
        variant,
        tuple: tuple.summary(),
        epsilon: config.epsilon,
        delta: config.delta,
        delta_factor,
        delta_effective: delta_factor * config.delta,
        unit: d,
        parts: s,
        recursion_factor,
        horizon,
        effective_horizon: d * n0,
        horizon_cap,
        truncated,
        k,
        n_trials: config.n_trials,
        seed,
        levels,
        final_p,
    };
    Ok((seq, diagnostics))
}

pub fn build_case2_sequence(
    factory: &dyn LearnerFactory,
    tuple: &DistinguishingTuple,
    horizon: usize,
    config: &CaseIIConfig,
    seed: u64,
) -> Result<(GameSequence, CaseIIDiagnostics)> {
    let layout = Layout {
        d: 1,
        s: 2,
        variant: Variant::Case2,
        delta_factor: 1.0,
    };
    build_recursive(factory, tuple, horizon, config, layout, seed)
}

/// `d` consecutive points per level, for `ε = ε₀ / d`; the additive slack
/// grows to `d e^{dε} δ`.
pub fn build_small_eps_sequence(
    factory: &dyn LearnerFactory,
    tuple: &DistinguishingTuple,
    horizon: usize,
    d: usize,
    config: &CaseIIConfig,
    seed: u64,
) -> Result<(GameSequence, CaseIIDiagnostics)> {
    if d == 0 {
        return Err(invalid("d must be at least 1"));
    }
    if horizon < 3 * d {
        return Err(invalid(format!(
            "horizon {horizon} too small for {d} points per level (need at least {})",
            3 * d
        )));
    }
    let layout = Layout {
        d,
        s: 2,
        variant: Variant::SmallEps,
        delta_factor: d as f64 * (d as f64 * config.epsilon).exp(),
    };
    build_recursive(factory, tuple, horizon, config, layout, seed)
}

/// `s`-way splits for large ε; requires `e^ε / s ≤ 3/4`.
pub fn build_large_eps_sequence(
    factory: &dyn LearnerFactory,
    tuple: &DistinguishingTuple,
    horizon: usize,
    s: usize,
    config: &CaseIIConfig,
    seed: u64,
) -> Result<(GameSequence, CaseIIDiagnostics)> {
    check_large_eps(config.epsilon, s)?;
    let layout = Layout {
        d: 1,
        s,
        variant: Variant::LargeEps,
        delta_factor: 1.0,
    };
    build_recursive(factory, tuple, horizon, config, layout, seed)
}

pub fn check_large_eps(epsilon: f64, s: usize) -> Result<()> {
    if s < 2 {
        return Err(invalid(format!("s must be at least 2, got {s}")));
    }
    let ratio = epsilon.exp() / s as f64;
    if ratio > 0.75 + 1e-12 {
        return Err(invalid(format!(
            "e^epsilon / s = {ratio:.6} > 3/4 (epsilon = {epsilon}, s = {s})"
        )));
    }
    Ok(())
}
