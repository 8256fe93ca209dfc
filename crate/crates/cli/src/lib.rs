//! Batch experiment runner for the `zerotwo` laboratory.
//!
//! Every subcommand reads one JSON config (with flag overrides), computes, and
//! writes its report files into `--out` together with the resolved
//! `config.json`. Exit status: 0 when every contract holds, 2 when one is
//! violated, 1 on input errors.

pub mod commands;
pub mod criteria;
pub mod error;
pub mod input;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::commands::Outcome;
use crate::error::CliResult;
use crate::input::{build_config, Validate};

#[derive(Debug, Parser)]
#[command(name = "zerotwo", version, about = "Cosine family and semigroup experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON config; missing fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Seed for randomized samples (default 42).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override one config field, e.g. `--set c=0.3` or `--set grid.points=500`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance-to-identity profile and law verdict.
    Profile(Common),
    /// d'Alembert residual grid.
    Dalembert(Common),
    /// Resolvent construction through S(λ, s) over a (λ, s) sweep.
    Resolvent(Common),
    /// Region parameters and the resolvent bound on sampled points.
    Region(Common),
    /// Laplace and Cesàro checks for a semigroup.
    SemigroupLaws(Common),
    /// Regenerate every acceptance number into one directory.
    Reproduce(Common),
}

/// Result of a completed run.
pub struct RunSummary {
    pub files: Vec<String>,
    pub violations: Vec<String>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.violations.is_empty() {
            0
        } else {
            2
        }
    }
}

fn execute<C>(common: &Common, f: fn(&C) -> CliResult<Outcome>) -> CliResult<RunSummary>
where
    C: Default + Serialize + DeserializeOwned + Validate,
{
    let cfg: C = build_config(common.config.as_deref(), common.seed, &common.set)?;
    let mut outcome = f(&cfg)?;
    outcome.bundle.add_json("config.json", &cfg)?;
    write(&outcome, &common.out)?;
    Ok(RunSummary {
        files: outcome.bundle.names().map(str::to_owned).collect(),
        violations: outcome.violations,
    })
}

fn write(outcome: &Outcome, dir: &Path) -> CliResult<()> {
    outcome.bundle.write_to(dir)
}

pub fn run(cli: &Cli) -> CliResult<RunSummary> {
    match &cli.command {
        Command::Profile(c) => execute(c, commands::profile),
        Command::Dalembert(c) => execute(c, commands::dalembert),
        Command::Resolvent(c) => execute(c, commands::resolvent_sweep),
        Command::Region(c) => execute(c, commands::region),
        Command::SemigroupLaws(c) => execute(c, commands::semigroup_laws),
        Command::Reproduce(c) => execute(c, commands::reproduce),
    }
}
