//! Experiment runner for the `dilab` binary: TOML configuration, flag
//! overrides, and the `pack`, `simulate`, `converse-check`, `near-codeword`,
//! `scales` and `sweep` pipelines.
//!
//! Outputs are deterministic: the same configuration and seed give
//! byte-identical files regardless of `--threads`.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{Context, OutDir, Report};
use crate::config::{Config, DEFAULT_SEED, DEFAULT_TRIALS};
use crate::error::{CliError, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "DILAB_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "dilab-out";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, Parser)]
#[command(
    name = "dilab",
    version,
    about = "Deterministic identification over fading Gaussian channels"
)]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed for every random substream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for Monte-Carlo trials (default: available cores).
    #[arg(long, global = true, value_name = "K")]
    pub threads: Option<usize>,
    /// Output directory (default: $DILAB_OUT_DIR, then ./dilab-out).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Monte-Carlo trials per estimate.
    #[arg(long, global = true, value_name = "T")]
    pub trials: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Build a saturated sphere-packing codebook.
    Pack,
    /// Estimate type I / type II errors of a codebook.
    Simulate {
        /// Codebook file (overrides `simulate.codebook`).
        #[arg(long)]
        codebook: Option<PathBuf>,
    },
    /// Compare a codebook's minimum distance with the converse spacing.
    ConverseCheck {
        /// Codebook file (overrides `converse-check.codebook`).
        #[arg(long)]
        codebook: Option<PathBuf>,
        /// Exponent `b` of the spacing schedule (overrides `converse-check.b`).
        #[arg(long)]
        b: Option<f64>,
    },
    /// Two codewords at the converse spacing: type I + type II error sums.
    NearCodeword,
    /// Dominance certificates along the scale chain and the capacity-regime table.
    Scales,
    /// Codebook size, rates, bounds and errors across block lengths.
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Pack => "pack",
            Command::Simulate { .. } => "simulate",
            Command::ConverseCheck { .. } => "converse-check",
            Command::NearCodeword => "near-codeword",
            Command::Scales => "scales",
            Command::Sweep => "sweep",
        }
    }
}

/// Outcome of a completed run.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub out_dir: PathBuf,
}

/// Resolves configuration, runs the subcommand and writes the summary.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let trials = cli.trials.or(cfg.trials).unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(precondition("trials", "must be at least 1"));
    }
    let threads = cli.threads.or(cfg.threads);
    if threads == Some(0) {
        return Err(precondition("threads", "must be at least 1"));
    }
    let ctx = Context {
        seed: cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
        trials,
        out: OutDir::new(&out_dir),
    };
    std::fs::create_dir_all(&out_dir).map_err(CliError::io("creating", &out_dir))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| precondition("threads", &e.to_string()))?;
    let report = pool.install(|| dispatch(&cli.command, &ctx, &cfg))?;
    ctx.out.write(SUMMARY_FILE, report.render())?;
    Ok(Outcome { report, out_dir })
}

fn dispatch(command: &Command, ctx: &Context, cfg: &Config) -> Result<Report> {
    match command {
        Command::Pack => commands::pack(ctx, &cfg.pack.clone().unwrap_or_default()),
        Command::Simulate { codebook } => {
            let mut sim = cfg.simulate.clone().unwrap_or_default();
            if codebook.is_some() {
                sim.codebook = codebook.clone();
            }
            commands::simulate(ctx, &sim, &cfg.pack.clone().unwrap_or_default())
        }
        Command::ConverseCheck { codebook, b } => {
            let mut conv = cfg.converse_check.clone().unwrap_or_default();
            if codebook.is_some() {
                conv.codebook = codebook.clone();
            }
            if b.is_some() {
                conv.b = *b;
            }
            commands::converse_check(ctx, &conv)
        }
        Command::NearCodeword => commands::near_codeword(ctx, &cfg.near_codeword.clone().unwrap_or_default()),
        Command::Scales => commands::scales(ctx, &cfg.scales.clone().unwrap_or_default()),
        Command::Sweep => commands::sweep(ctx, &cfg.sweep.clone().unwrap_or_default()),
    }
}

fn precondition(name: &'static str, reason: &str) -> CliError {
    CliError::Precondition {
        param: name.to_string(),
        source: dilab_core::Error::InvalidParameter {
            name,
            reason: reason.to_string(),
        },
    }
}
