//! Batch experiment driver for the variation-bounded online convex
//! optimization library.
//!
//! Exit codes: 0 when every requested check passed, 1 when a check
//! failed, 2 on configuration or execution errors.

mod config;
mod output;
mod runner;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "oco", version, about = "Online convex optimization experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one scenario; write a trace and a summary.
    Run(CommonArgs),
    /// Run several algorithms on one shared scenario; write a joined
    /// regret table.
    Compare(CommonArgs),
    /// Run every combination of a parameter grid; write one table row
    /// per run.
    Sweep(CommonArgs),
    /// Re-run bound checks against a stored trace.
    Check(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config file (repeat for compare).
    #[arg(long, required = true)]
    config: Vec<PathBuf>,
    /// Directory for output files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the bandit run seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweep (default: one per core).
    #[arg(long)]
    jobs: Option<usize>,
}

fn single_config(args: &CommonArgs, verb: &str) -> Result<config::LoadedConfig> {
    match args.config.as_slice() {
        [path] => config::load_config(path),
        _ => bail!("{verb} takes exactly one --config"),
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(args) => {
            let loaded = single_config(&args, "run")?;
            runner::cmd_run(&loaded, &args.out, args.seed)
        }
        Command::Compare(args) => {
            let loadeds: Result<Vec<_>> =
                args.config.iter().map(|p| config::load_config(p)).collect();
            runner::cmd_compare(&loadeds?, &args.out, args.seed)
        }
        Command::Sweep(args) => {
            let loaded = single_config(&args, "sweep")?;
            runner::cmd_sweep(&loaded, &args.out, args.seed, args.jobs)
        }
        Command::Check(args) => {
            let loaded = single_config(&args, "check")?;
            runner::cmd_check(&loaded, &args.out, args.seed)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    };
    std::process::exit(code);
}
