//! `hf`: reports and plot-ready data for the transition family, the
//! horizon-regular substitution and radial null rays.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on a
//! usage error, 3 on an I/O failure.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};

/// Bad input from the command line or config file.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Parser, Debug)]
#[command(name = "hf", version, about = "Hypersmooth transition and horizon-crossing toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// `key = value` file; flags take precedence over it
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Sampling seed (HF_SEED overrides)
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Truncation window of series arithmetic
    #[arg(long, global = true)]
    window: Option<String>,
    /// Most series terms kept after each operation
    #[arg(long = "max-terms", global = true)]
    max_terms: Option<String>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// Data file format: csv or json
    #[arg(long, global = true)]
    format: Option<String>,
    /// Gravitational constant (rational, default 1)
    #[arg(long = "G", global = true, value_name = "G")]
    g: Option<String>,
    /// Mass (rational, default 1)
    #[arg(long = "M", global = true, value_name = "M")]
    m: Option<String>,
    /// Speed of light (rational, default 1)
    #[arg(long = "c", global = true, value_name = "C")]
    c: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample H_a and H'_a, check junctions and the 2/a bound
    Transition(commands::transition::TransitionArgs),
    /// Apply dU = dt + f_M dR at one radius and standardize the result
    Transform(commands::transform::TransformArgs),
    /// Integrate a radial null ray in the t or U chart
    Geodesic(commands::geodesic::GeodesicArgs),
}

impl Command {
    fn parameter(&self) -> Option<&String> {
        match self {
            Command::Transition(a) => a.a.as_ref(),
            Command::Transform(a) => a.a.as_ref(),
            Command::Geodesic(_) => None,
        }
    }
}

/// Result of a command that ran to completion.
pub struct Verdict {
    pub pass: bool,
}

fn run(cli: Cli) -> anyhow::Result<Verdict> {
    let g = &cli.global;
    let file = match &g.config {
        Some(path) => config::read_config_file(path)?,
        None => Overrides::default(),
    };
    let flags = Overrides {
        g: g.g.clone(),
        m: g.m.clone(),
        c: g.c.clone(),
        a: cli.command.parameter().cloned(),
        window: g.window.clone(),
        max_terms: g.max_terms.clone(),
        out: g.out.clone(),
        format: g.format.clone(),
        seed: g.seed.clone(),
    };
    let env_seed = std::env::var(config::SEED_ENV).ok();
    let cfg = RunConfig::resolve(&flags, &file, env_seed.as_deref())?;
    std::fs::create_dir_all(&cfg.out)?;
    match &cli.command {
        Command::Transition(args) => commands::transition::run(args, &cfg),
        Command::Transform(args) => commands::transform::run(args, &cfg),
        Command::Geodesic(args) => commands::geodesic::run(args, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(v) if v.pass => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
