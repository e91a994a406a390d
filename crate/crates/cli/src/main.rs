//! Command-line runner for games, adversary builds, sweeps and audits.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::Ctx;

#[derive(Parser)]
#[command(name = "privlearn", version, about = "Private online learning lower-bound lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Monte Carlo trials for the command's final estimate.
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Play one game and write its transcript.
    RunGame(Common),
    /// Build an adversarial sequence and verify its diagnostics.
    BuildAdversary {
        #[command(flatten)]
        common: Common,
        /// Re-verify a saved diagnostics.json instead of building.
        #[arg(long, conflicts_with = "config")]
        replay: Option<PathBuf>,
        /// δ used when verifying a replay; defaults to the recorded one.
        #[arg(long, requires = "replay")]
        delta: Option<f64>,
    },
    /// Mistakes against the adversary over a list of horizons.
    Sweep(Common),
    /// Estimate concentration on the dummy input.
    AuditConcentration(Common),
    /// Empirical (ε, δ) audit on a pair of neighbouring inputs.
    AuditDp(Common),
    /// Maximum-error statistics of continual counters.
    CounterBench(Common),
}

fn context(common: &Common) -> Result<Ctx> {
    let path = common.config.as_ref().context("--config <path> is required")?;
    let config = config::load(path)?;
    Ok(Ctx {
        seed: common.seed.or(config.seed).unwrap_or(0),
        trials: common.trials,
        out: common.out.clone(),
        config,
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::RunGame(c) => commands::run_game(&context(&c)?),
        Command::BuildAdversary { common, replay, delta } => match replay {
            Some(path) => commands::replay(&path, delta),
            None => commands::build_adversary(&context(&common)?),
        },
        Command::Sweep(c) => commands::sweep(&context(&c)?),
        Command::AuditConcentration(c) => commands::audit_concentration(&context(&c)?),
        Command::AuditDp(c) => commands::audit_dp_cmd(&context(&c)?),
        Command::CounterBench(c) => commands::counter_bench(&context(&c)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
