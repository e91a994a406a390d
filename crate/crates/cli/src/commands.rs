use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use privlearn::adversaries::{
    build_case2_sequence, build_firing_adversary_sequence, build_large_eps_sequence, build_small_eps_sequence,
    verify_diagnostics, CaseIIDiagnostics, FiringDiagnostics, VerifyReport,
};
use privlearn::auditors::{audit_dp, default_event_family, estimate_concentration, find_xdif_witness};
use privlearn::counters::{max_error_samples, polylog_threshold, trace, trace_csv, CounterSpec, Mechanism};
use privlearn::game::{expected_mistakes, play, GameSequence, MeanEstimate};
use privlearn::hypothesis::{littlestone_dimension, DistinguishingTuple};
use privlearn::learners::LearnerFactory;
use privlearn::rng::derive_seed;

use crate::config::{AdversarySpec, ExperimentConfig};
use crate::svg;

/// Seed tags for the stages of one experiment.
const LEARNER: u64 = 1;
const ADVERSARY: u64 = 2;
const EVALUATION: u64 = 3;
const AUDIT: u64 = 4;

pub struct Ctx {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub trials: Option<usize>,
    pub out: PathBuf,
}

impl Ctx {
    fn trials_or(&self, default: usize) -> usize {
        self.trials.or(self.config.trials).unwrap_or(default)
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let path = self.out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, &s)
    }
}

#[derive(Serialize)]
struct GameSummary {
    learner: String,
    horizon: usize,
    mistakes: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_mistakes: Option<MeanEstimate>,
}

pub fn run_game(ctx: &Ctx) -> Result<ExitCode> {
    let class = ctx.config.class()?;
    let seq = ExperimentConfig::need(&ctx.config.sequence, "sequence")?
        .resolve(&class)
        .context("config field `sequence`")?;
    let fac = ctx
        .config
        .learner()?
        .build(class, seq.horizon(), derive_seed(ctx.seed, LEARNER))
        .context("config field `learner`")?;
    let tr = play(fac.as_ref(), &seq, ctx.seed)?;
    let mean_mistakes = match ctx.trials.or(ctx.config.trials) {
        Some(n) => Some(expected_mistakes(fac.as_ref(), &seq, n, derive_seed(ctx.seed, EVALUATION))?),
        None => None,
    };
    let summary = GameSummary {
        learner: fac.name(),
        horizon: seq.horizon(),
        mistakes: tr.mistake_count(),
        seed: ctx.seed,
        mean_mistakes,
    };
    ctx.write("transcript.jsonl", &tr.to_jsonl()?)?;
    ctx.write_json("summary.json", &summary)?;
    println!(
        "learner={} T={} M={} seed={}",
        summary.learner, summary.horizon, summary.mistakes, summary.seed
    );
    if let Some(m) = summary.mean_mistakes {
        println!("E[M]={:.4} se={:.4} trials={}", m.mean, m.std_error, m.n_trials);
    }
    Ok(ExitCode::SUCCESS)
}

enum Built {
    Recursive(CaseIIDiagnostics),
    Firing(FiringDiagnostics),
}

fn build(
    spec: &AdversarySpec,
    fac: &dyn LearnerFactory,
    tuple: Option<&DistinguishingTuple>,
    horizon: usize,
    seed: u64,
) -> Result<(GameSequence, Built)> {
    let need_tuple = || tuple.context("this adversary needs a distinguishing tuple");
    Ok(match spec {
        AdversarySpec::Case2 { config } => {
            let (s, d) = build_case2_sequence(fac, need_tuple()?, horizon, config, seed)?;
            (s, Built::Recursive(d))
        }
        AdversarySpec::SmallEps { d, config } => {
            let (s, diag) = build_small_eps_sequence(fac, need_tuple()?, horizon, *d, config, seed)?;
            (s, Built::Recursive(diag))
        }
        AdversarySpec::LargeEps { s, config } => {
            let (seq, diag) = build_large_eps_sequence(fac, need_tuple()?, horizon, *s, config, seed)?;
            (seq, Built::Recursive(diag))
        }
        AdversarySpec::Firing { config } => {
            let (s, d) = build_firing_adversary_sequence(fac, horizon, config, seed)?;
            (s, Built::Firing(d))
        }
    })
}

fn print_report(report: &VerifyReport) {
    for c in report.failures() {
        match c.level {
            Some(l) => println!("FAIL level {l} {}: {}", c.name, c.detail),
            None => println!("FAIL {}: {}", c.name, c.detail),
        }
    }
    let failed = report.failures().count();
    println!("checks: {} passed, {failed} failed", report.checks.len() - failed);
}

fn print_recursive(diag: &CaseIIDiagnostics) {
    println!(
        "variant={:?} k={} levels={} inserted={} final_p={:.4}",
        diag.variant,
        diag.k,
        diag.levels.len(),
        diag.inserted_count(),
        diag.final_p.p_hat
    );
    if diag.truncated {
        println!(
            "note: horizon truncated to the first {} of {} rounds (exp(1/(32 delta)) = {:.1})",
            diag.effective_horizon,
            diag.horizon,
            diag.horizon_cap.unwrap_or(f64::INFINITY)
        );
    }
}

pub fn replay(path: &Path, delta: Option<f64>) -> Result<ExitCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let diag: CaseIIDiagnostics = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let report = verify_diagnostics(&diag, delta.unwrap_or(diag.delta));
    print_recursive(&diag);
    print_report(&report);
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

#[derive(Serialize)]
struct BuildSummary {
    learner: String,
    horizon: usize,
    levels: usize,
    mistakes: MeanEstimate,
    checks_passed: bool,
    seed: u64,
}

pub fn build_adversary(ctx: &Ctx) -> Result<ExitCode> {
    let class = ctx.config.class()?;
    let horizon = ctx.config.horizon()?;
    let spec = ExperimentConfig::need(&ctx.config.adversary, "adversary")?;
    let fac = ctx
        .config
        .learner()?
        .build(class.clone(), horizon, derive_seed(ctx.seed, LEARNER))
        .context("config field `learner`")?;
    let tuple = match spec {
        AdversarySpec::Firing { .. } => None,
        _ => Some(ctx.config.tuple(&class)?),
    };
    let (seq, built) = build(spec, fac.as_ref(), tuple.as_ref(), horizon, derive_seed(ctx.seed, ADVERSARY))?;
    let mistakes = expected_mistakes(fac.as_ref(), &seq, ctx.trials_or(500), derive_seed(ctx.seed, EVALUATION))?;
    ctx.write("sequence.json", &(seq.to_json()? + "\n"))?;
    let (passed, levels) = match &built {
        Built::Recursive(diag) => {
            let report = verify_diagnostics(diag, spec.delta());
            ctx.write_json("diagnostics.json", diag)?;
            ctx.write("diagnostics.csv", &diag.to_csv())?;
            ctx.write_json("verify.json", &report)?;
            print_recursive(diag);
            print_report(&report);
            (report.passed(), diag.levels.len())
        }
        Built::Firing(diag) => {
            ctx.write_json("diagnostics.json", diag)?;
            ctx.write("diagnostics.csv", &diag.to_csv())?;
            println!(
                "levels={} right_branches={} stop={:?}",
                diag.levels.len(),
                diag.right_branches(),
                diag.stop
            );
            for lv in diag.levels.iter().filter(|l| !l.marginal_ok) {
                println!(
                    "FAIL level {} marginal: {:.4} > {:.4}",
                    lv.level, lv.marginal.p_hat, lv.marginal_bound
                );
            }
            (diag.marginals_ok(), diag.levels.len())
        }
    };
    println!("E[M]={:.4} se={:.4} trials={}", mistakes.mean, mistakes.std_error, mistakes.n_trials);
    ctx.write_json(
        "summary.json",
        &BuildSummary {
            learner: fac.name(),
            horizon,
            levels,
            mistakes,
            checks_passed: passed,
            seed: ctx.seed,
        },
    )?;
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

/// Largest `k` with `d (s^k - 1) / (s - 1) <= T`.
fn analytic_levels(horizon: usize, d: usize, s: usize) -> usize {
    let mut k = 0;
    let mut blocks = 0usize;
    loop {
        let next = blocks * s + 1;
        if d * next > horizon {
            return k;
        }
        blocks = next;
        k += 1;
    }
}

#[derive(Serialize)]
struct SweepRow {
    horizon: usize,
    levels: Option<usize>,
    mean_mistakes: Option<f64>,
    std_error: Option<f64>,
    n_trials: usize,
    checks_passed: Option<bool>,
    lower_anchor: f64,
    name_and_shame_anchor: f64,
    counter_anchor: f64,
    error: String,
}

pub fn sweep(ctx: &Ctx) -> Result<ExitCode> {
    let class = ctx.config.class()?;
    let horizons = ExperimentConfig::need(&ctx.config.horizons, "horizons")?;
    if horizons.is_empty() {
        bail!("config field `horizons` must not be empty");
    }
    if horizons.windows(2).any(|w| w[0] >= w[1]) {
        bail!("config field `horizons` must be strictly ascending");
    }
    let spec = ExperimentConfig::need(&ctx.config.adversary, "adversary")?;
    let learner = ctx.config.learner()?;
    let tuple = match spec {
        AdversarySpec::Firing { .. } => None,
        _ => Some(ctx.config.tuple(&class)?),
    };
    let (d, s) = match spec {
        AdversarySpec::SmallEps { d, .. } => (*d, 2),
        AdversarySpec::LargeEps { s, .. } => (1, *s),
        _ => (1, 2),
    };
    let ldim = littlestone_dimension(&class)? as f64;
    let anchors = &ctx.config.anchors;
    let trials = ctx.trials_or(500);

    let mut rows = Vec::new();
    for (j, &t) in horizons.iter().enumerate() {
        let cell = derive_seed(ctx.seed, 100 + j as u64);
        let run = || -> Result<(usize, MeanEstimate, bool)> {
            let fac = learner.build(class.clone(), t, derive_seed(cell, LEARNER))?;
            let (seq, built) = build(spec, fac.as_ref(), tuple.as_ref(), t, derive_seed(cell, ADVERSARY))?;
            let est = expected_mistakes(fac.as_ref(), &seq, trials, derive_seed(cell, EVALUATION))?;
            let (levels, ok) = match built {
                Built::Recursive(diag) => (diag.levels.len(), verify_diagnostics(&diag, spec.delta()).passed()),
                Built::Firing(diag) => (diag.levels.len(), diag.marginals_ok()),
            };
            Ok((levels, est, ok))
        };
        let mut row = SweepRow {
            horizon: t,
            levels: None,
            mean_mistakes: None,
            std_error: None,
            n_trials: trials,
            checks_passed: None,
            lower_anchor: analytic_levels(t, d, s) as f64 / 4.0,
            name_and_shame_anchor: ldim / anchors.name_and_shame_delta,
            counter_anchor: polylog_threshold(t, anchors.counter_epsilon),
            error: String::new(),
        };
        match run() {
            Ok((levels, est, ok)) => {
                row.levels = Some(levels);
                row.mean_mistakes = Some(est.mean);
                row.std_error = Some(est.std_error);
                row.checks_passed = Some(ok);
                println!("T={t} levels={levels} E[M]={:.4} se={:.4} checks={ok}", est.mean, est.std_error);
            }
            Err(e) => {
                row.error = format!("{e:#}");
                println!("T={t} failed: {}", row.error);
            }
        }
        rows.push(row);
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    ctx.write("sweep.csv", std::str::from_utf8(&bytes)?)?;

    let measured = svg::Measured {
        label: "empirical E[M]".into(),
        points: rows
            .iter()
            .filter_map(|r| Some((r.horizon as f64, r.mean_mistakes?, r.std_error?)))
            .collect(),
    };
    let curve = |f: &dyn Fn(&SweepRow) -> f64| rows.iter().map(|r| (r.horizon as f64, f(r))).collect();
    let lines = [
        svg::Series {
            label: "k/4 lower bound (shape)".into(),
            color: "#1f77b4",
            points: curve(&|r| r.lower_anchor),
            dashed: true,
        },
        svg::Series {
            label: "Ldim/delta plateau (shape)".into(),
            color: "#d62728",
            points: curve(&|r| r.name_and_shame_anchor),
            dashed: true,
        },
        svg::Series {
            label: "(log T)^1.5/eps (shape)".into(),
            color: "#2ca02c",
            points: curve(&|r| r.counter_anchor),
            dashed: true,
        },
    ];
    let title = format!("mistakes of {} against the adversary", learner.kind());
    ctx.write("sweep.svg", &svg::plot(&title, &measured, &lines))?;

    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    println!("sweep: {} horizons, {failed} failed", rows.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

pub fn audit_concentration(ctx: &Ctx) -> Result<ExitCode> {
    let class = ctx.config.class()?;
    let horizon = ctx.config.horizon()?;
    let fac = ctx
        .config
        .learner()?
        .build(class.clone(), horizon, derive_seed(ctx.seed, LEARNER))
        .context("config field `learner`")?;
    let trials = ctx.trials_or(2000);
    let tuple = match &ctx.config.witness {
        Some(w) => {
            let found = find_xdif_witness(fac.as_ref(), w.k, horizon, w.beta, trials, derive_seed(ctx.seed, AUDIT))?;
            let r = &found.report;
            println!(
                "witness x_dif={} max|Q_t|={} bound={} weight_ok={} domain_ok={}",
                found.x_dif,
                r.frequent_sizes.iter().max().copied().unwrap_or(0),
                r.threshold_bound,
                r.weight_premise_ok,
                r.domain_premise_ok
            );
            ctx.write_json("witness.json", r)?;
            found.tuple
        }
        None => ctx.config.tuple(&class)?,
    };
    let rep = estimate_concentration(fac.as_ref(), &tuple, horizon, trials, derive_seed(ctx.seed, EVALUATION))?;
    ctx.write_json("concentration.json", &rep)?;
    println!(
        "tuple=({}, {}, x_eq={}, x_dif={}) T={horizon} trials={trials}",
        rep.tuple.f0, rep.tuple.f1, rep.tuple.x_eq, rep.tuple.x_dif
    );
    println!(
        "beta_hat={:.4} (ci {:.4}) swapped={:.4} best={:?}",
        rep.beta_hat.p_hat, rep.beta_hat.ci_halfwidth, rep.beta_hat_swapped.p_hat, rep.orientation
    );
    Ok(ExitCode::SUCCESS)
}

pub fn audit_dp_cmd(ctx: &Ctx) -> Result<ExitCode> {
    let class = ctx.config.class()?;
    let tau = ExperimentConfig::need(&ctx.config.sequence, "sequence")?
        .resolve(&class)
        .context("config field `sequence`")?;
    let nb = ExperimentConfig::need(&ctx.config.neighbour, "neighbour")?;
    let tau_prime = tau.with_point(nb.round, nb.point).context("config field `neighbour`")?;
    let delta = *ExperimentConfig::need(&ctx.config.delta, "delta")?;
    let fac = ctx
        .config
        .learner()?
        .build(class.clone(), tau.horizon(), derive_seed(ctx.seed, LEARNER))
        .context("config field `learner`")?;
    let family = default_event_family(tau.horizon(), class.domain_size());
    let rep = audit_dp(fac.as_ref(), &tau, &tau_prime, &family, delta, ctx.trials_or(10_000), derive_seed(ctx.seed, AUDIT))?;
    ctx.write_json("audit.json", &rep)?;
    println!(
        "round={} delta={} trials={} events={}",
        rep.differing_round,
        rep.delta,
        rep.n_trials,
        family.len()
    );
    println!(
        "eps_hat={} (forward {}, backward {}) conservative={:.4} worst={}",
        fmt_eps(rep.eps_hat),
        fmt_eps(rep.eps_forward),
        fmt_eps(rep.eps_backward),
        rep.eps_lower,
        rep.worst_event.as_deref().unwrap_or("-")
    );
    Ok(ExitCode::SUCCESS)
}

fn fmt_eps(e: f64) -> String {
    if e.is_infinite() {
        "inf".into()
    } else {
        format!("{e:.4}")
    }
}

#[derive(Serialize)]
struct BenchRow {
    mechanism: String,
    horizon: usize,
    epsilon: f64,
    n_trials: usize,
    median_max_error: f64,
    p90_max_error: f64,
    threshold: f64,
    within_threshold: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let i = ((sorted.len() as f64 * q).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[i]
}

pub fn counter_bench(ctx: &Ctx) -> Result<ExitCode> {
    let spec = ExperimentConfig::need(&ctx.config.counter, "counter")?;
    if spec.horizons.is_empty() || spec.mechanisms.is_empty() {
        bail!("config fields `counter.horizons` and `counter.mechanisms` must not be empty");
    }
    let trials = ctx.trials_or(500);
    let mut w = csv::Writer::from_writer(Vec::new());
    for (mi, &mechanism) in spec.mechanisms.iter().enumerate() {
        for (ti, &t) in spec.horizons.iter().enumerate() {
            let cs = CounterSpec::new(t, spec.epsilon, mechanism);
            let bits = spec.stream.bits(t);
            let seed = derive_seed(ctx.seed, ((mi as u64) << 32) | ti as u64);
            let mut errs = max_error_samples(&cs, &bits, trials, seed)?;
            errs.sort_by(f64::total_cmp);
            let threshold = polylog_threshold(t, spec.epsilon);
            let row = BenchRow {
                mechanism: mechanism_name(mechanism).into(),
                horizon: t,
                epsilon: spec.epsilon,
                n_trials: trials,
                median_max_error: quantile(&errs, 0.5),
                p90_max_error: quantile(&errs, 0.9),
                threshold,
                within_threshold: errs.iter().filter(|&&e| e <= threshold).count() as f64 / trials as f64,
            };
            println!(
                "{} T={t} median={:.2} p90={:.2} within={:.3}",
                row.mechanism, row.median_max_error, row.p90_max_error, row.within_threshold
            );
            w.serialize(&row)?;
        }
        let t0 = spec.horizons[0];
        let rows = trace(&CounterSpec::new(t0, spec.epsilon, mechanism), &spec.stream.bits(t0), derive_seed(ctx.seed, 0x7ACE + mi as u64))?;
        ctx.write(&format!("trace_{}.csv", mechanism_name(mechanism)), &trace_csv(&rows))?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    ctx.write("counter_bench.csv", std::str::from_utf8(&bytes)?)?;
    Ok(ExitCode::SUCCESS)
}

fn mechanism_name(m: Mechanism) -> &'static str {
    match m {
        Mechanism::Naive => "naive",
        Mechanism::Tree => "tree",
        Mechanism::NoiseFree => "noise_free",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_levels_match_segment_schedule() {
        assert_eq!(analytic_levels(31, 1, 2), 5);
        assert_eq!(analytic_levels(30, 1, 2), 4);
        assert_eq!(analytic_levels(14, 2, 2), 3);
        assert_eq!(analytic_levels(1024, 1, 4), 5);
    }

    #[test]
    fn quantile_picks_order_statistic() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.0);
        assert_eq!(quantile(&v, 0.9), 4.0);
    }
}
