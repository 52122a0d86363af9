//! One function per command. Each writes its files into `out` and returns a
//! summary row for sweeps.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use log::{info, warn};
use serde::Serialize;

use hetero_bi::functional::{action, slice_compare, StripGrid};
use hetero_bi::io::{read_profile_csv, write_json, write_profile_csv};
use hetero_bi::solver::{
    direct_minimize, odd_minimize, quadrature_heteroclinic, verify_minimizer, Solution, VerificationReport,
};
use hetero_bi::transforms::{count_ties, oddify, rearrange};
use hetero_bi::{Error, Profile};

use crate::config::{Command, Format, RunConfig};
use crate::error::CliError;

/// Headline numbers of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub action: Option<f64>,
    pub max_slope: Option<f64>,
    pub conservation_max: Option<f64>,
    pub el_max: Option<f64>,
    pub verified: Option<bool>,
}

fn write_profile(out: &Path, stem: &str, p: &Profile, format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => write_profile_csv(out.join(format!("{stem}.csv")), p)?,
        Format::Json => write_json(out.join(format!("{stem}.json")), p)?,
    }
    Ok(())
}

fn residual_max(check: Option<&hetero_bi::solver::Check>) -> Option<f64> {
    check.and_then(|c| c.value)
}

fn summarize(report: &VerificationReport, p: &Profile) -> Summary {
    Summary {
        action: Some(report.action),
        max_slope: Some(p.max_abs_slope()),
        conservation_max: residual_max(report.get("conservation")),
        el_max: residual_max(report.get("euler_lagrange")),
        verified: Some(report.pass),
    }
}

fn verdict(report: &VerificationReport, summary: Summary) -> Result<Summary, CliError> {
    if report.pass {
        Ok(summary)
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| c.status == hetero_bi::solver::CheckStatus::Fail)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::Verification(failed.join(", ")))
    }
}

/// Writes the best iterate of a failed solve before passing the error on.
fn solved(result: hetero_bi::Result<Solution>, out: &Path, format: Format) -> Result<Solution, CliError> {
    match result {
        Ok(s) => Ok(s),
        Err(Error::NonConvergence {
            iterations,
            residual,
            best_action,
            best,
        }) => {
            warn!("writing the best iterate of an unconverged solve");
            write_profile(out, "best_iterate", &best, format)?;
            Err(Error::NonConvergence {
                iterations,
                residual,
                best_action,
                best,
            }
            .into())
        }
        Err(e) => Err(e.into()),
    }
}

fn finish_solution(cfg: &RunConfig, out: &Path, sol: &Solution, full: &Profile) -> Result<Summary, CliError> {
    let (w, a) = (cfg.potential()?, cfg.weight()?);
    write_json(out.join("breakdown.json"), &sol.breakdown)?;
    write_json(out.join("diagnostics.json"), &sol.diagnostics)?;
    let report = verify_minimizer(full, &w, &a, &cfg.verify);
    write_json(out.join("verify.json"), &report)?;
    info!(
        "action {:.12e}, verification {}",
        report.action,
        if report.pass { "passed" } else { "failed" }
    );
    verdict(&report, summarize(&report, full))
}

fn solve(cfg: &RunConfig, out: &Path) -> Result<Summary, CliError> {
    let (w, a) = (cfg.potential()?, cfg.weight()?);
    let sol = solved(direct_minimize(&cfg.solver, &w, &a), out, cfg.format)?;
    write_profile(out, "profile", &sol.profile, cfg.format)?;
    finish_solution(cfg, out, &sol, &sol.profile)
}

fn solve_odd(cfg: &RunConfig, out: &Path) -> Result<Summary, CliError> {
    let (w, a) = (cfg.potential()?, cfg.weight()?);
    let sol = solved(odd_minimize(&cfg.solver, &w, &a), out, cfg.format)?;
    let full = oddify(&sol.profile)?;
    write_profile(out, "half", &sol.profile, cfg.format)?;
    write_profile(out, "profile", &full, cfg.format)?;
    finish_solution(cfg, out, &sol, &full)
}

fn quadrature(cfg: &RunConfig, out: &Path) -> Result<Summary, CliError> {
    let w = cfg.potential()?;
    let a = hetero_bi::weights::constant(1.0)?;
    if cfg.weight()?.constant != Some(1.0) {
        warn!("quadrature solves the autonomous problem; the configured weight is ignored");
    }
    let p = quadrature_heteroclinic(&w, cfg.solver.boundary_tol, cfg.quadrature_step)?;
    write_profile(out, "profile", &p, cfg.format)?;
    write_json(out.join("breakdown.json"), &action(&p, &w, &a)?)?;
    let report = verify_minimizer(&p, &w, &a, &cfg.verify);
    write_json(out.join("verify.json"), &report)?;
    verdict(&report, summarize(&report, &p))
}

fn input_profile(cfg: &RunConfig) -> Result<Profile, CliError> {
    let path = cfg
        .profile
        .as_ref()
        .ok_or_else(|| CliError::Config("profile: missing".into()))?;
    read_profile_csv(path).map_err(|e| CliError::Config(format!("profile: {}: {e}", path.display())))
}

fn verify(cfg: &RunConfig, out: &Path) -> Result<Summary, CliError> {
    let (w, a) = (cfg.potential()?, cfg.weight()?);
    let p = input_profile(cfg)?;
    let report = verify_minimizer(&p, &w, &a, &cfg.verify);
    write_json(out.join("verify.json"), &report)?;
    verdict(&report, summarize(&report, &p))
}

#[derive(Serialize)]
struct RearrangeReport {
    action_before: f64,
    action_after: f64,
    ties: usize,
}

fn rearrange_cmd(cfg: &RunConfig, out: &Path) -> Result<Summary, CliError> {
    let (w, a) = (cfg.potential()?, cfg.weight()?);
    let p = input_profile(cfg)?;
    let r = rearrange(&p)?;
    let report = RearrangeReport {
        action_before: action(&p, &w, &a)?.total,
        action_after: action(&r, &w, &a)?.total,
        ties: count_ties(&p),
    };
    write_profile(out, "rearranged", &r, cfg.format)?;
    write_json(out.join("rearrange.json"), &report)?;
    Ok(Summary {
        action: Some(report.action_after),
        max_slope: Some(r.max_abs_slope()),
        ..Summary::default()
    })
}

#[derive(Serialize)]
struct StripOutput {
    nx: usize,
    ny: usize,
    amplitude: f64,
    reference_1d: f64,
    report: hetero_bi::functional::SliceReport,
}

/// Wiggles the 1D minimizer across the strip and compares the 2D action with
/// width times the 1D minimum on the same x-grid.
fn gibbons2d(cfg: &RunConfig, out: &Path) -> Result<Summary, CliError> {
    let w = cfg.potential()?;
    let s = &cfg.strip;
    let one = hetero_bi::weights::constant(1.0)?;
    let solver = hetero_bi::solver::SolverConfig {
        nodes: s.nx,
        center: 0.0,
        ..cfg.solver.clone()
    };
    let sol = solved(direct_minimize(&solver, &w, &one), out, cfg.format)?;
    let base = &sol.profile;
    let (amp, width) = (s.amplitude, s.width);
    let phase = |y: f64| if width > 0.0 { (2.0 * PI * y / width).sin() } else { 0.0 };
    let grid = StripGrid::from_fn(cfg.solver.half_length, width, s.nx, s.ny, |x, y| {
        base.value_at(x + amp * phase(y))
    })?;
    let report = slice_compare(&grid, &w, Some(sol.breakdown.total))?;
    let pass = report.pass;
    let output = StripOutput {
        nx: s.nx,
        ny: s.ny,
        amplitude: amp,
        reference_1d: sol.breakdown.total,
        report,
    };
    write_json(out.join("strip.json"), &output)?;
    let summary = Summary {
        action: Some(output.report.total_2d),
        verified: Some(pass),
        ..Summary::default()
    };
    if pass {
        Ok(summary)
    } else {
        Err(CliError::Verification("strip comparison".into()))
    }
}

/// Runs a single non-sweep command, creating `out` first.
pub fn run_one(cfg: &RunConfig, out: &Path) -> Result<Summary, CliError> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(Error::from)?;
    match cfg.command()? {
        Command::Solve => solve(cfg, out),
        Command::SolveOdd => solve_odd(cfg, out),
        Command::Quadrature => quadrature(cfg, out),
        Command::Verify => verify(cfg, out),
        Command::Rearrange => rearrange_cmd(cfg, out),
        Command::Gibbons2d => gibbons2d(cfg, out),
        Command::Sweep => Err(CliError::Config("command: sweeps cannot be nested".into())),
    }
}
