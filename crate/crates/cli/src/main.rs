//! `hetero-bi`: solve, verify and export heteroclinic profiles from a JSON
//! run configuration.
//!
//! Exit status: 0 success, 1 runtime failure, 2 verification failure (or a
//! failed sweep row), 3 solver non-convergence, 4 configuration error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Command, Format, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "hetero-bi",
    version,
    about = "Heteroclinic profiles for the relativistic double-well action"
)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Profile file format; overrides `format` in the config.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides `solver.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps (default: one per core).
    #[arg(long)]
    jobs: Option<usize>,
}

fn run(args: &Args) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if let Some(s) = args.seed {
        cfg.solver.seed = s;
    }
    if args.jobs == Some(0) {
        return Err(CliError::Config("jobs: must be positive".into()));
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    if cfg.command()? == Command::Sweep {
        cfg.validate()?;
        std::fs::create_dir_all(&out).map_err(hetero_bi::Error::from)?;
        let (table, ok) = sweep::sweep(&cfg, &out, args.jobs, args.seed)?;
        hetero_bi::io::write_json(out.join("sweep.json"), &table)?;
        if !ok {
            let failed: Vec<String> = table
                .iter()
                .filter(|r| r.exit_code != 0)
                .map(|r| r.row.to_string())
                .collect();
            return Err(CliError::Verification(format!(
                "sweep rows failed: {}",
                failed.join(", ")
            )));
        }
        return Ok(());
    }
    commands::run_one(&cfg, &out).map(|_| ())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HETERO_BI_LOG", "warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hetero-bi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
