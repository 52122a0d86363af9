//! Three independent routes to a heteroclinic: the first-integral
//! quadrature, direct minimization of the discrete action, and phase-space
//! shooting. Plus the odd half-line variant and a verification bundle.

mod newton;
mod quadrature;
mod shooting;
mod verify;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{
    action_with_kernel, conservation_residual, el_residual, regularized_conservation_residual, uniform_nodes,
    ActionBreakdown, Profile,
};
use crate::kernel::{make_regularized, Kernel};
use crate::potentials::Potential;
use crate::transforms::clamp;
use crate::weights::Weight;
use newton::Problem;

pub use quadrature::{quadrature_heteroclinic, speed};
pub use shooting::{phase_flow_step, shoot, shoot_two_sided, PhaseState, Trajectory};
pub use verify::{stretch_quotient, verify_minimizer, Check, CheckStatus, VerificationReport, VerifyOptions};

pub(crate) fn problem_for<'a>(
    t: &[f64],
    w: &'a Potential,
    a: &Weight,
    kernel: Kernel,
    pinned: Vec<bool>,
) -> Problem<'a> {
    Problem::new(t, w, a, kernel, pinned, 1.0, false)
}

/// Discretization and stopping parameters shared by the minimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Window half-length `L`; the full-line window is `[center − L, center + L]`.
    pub half_length: f64,
    /// Number of grid nodes on the window (at least 16).
    pub nodes: usize,
    /// Slopes are capped at `1 − slope_margin`.
    pub slope_margin: f64,
    /// Endpoints are pinned at `±(1 − boundary_tol)`.
    pub boundary_tol: f64,
    /// Stopping threshold on the projected gradient, in Euler–Lagrange units.
    pub tol: f64,
    pub max_iter: usize,
    /// Minimize with `Ψₙ` in place of `g`.
    pub regularization: Option<u32>,
    pub seed: u64,
    /// Extra randomly perturbed starting points beyond the linear ramp.
    pub multistart: usize,
    pub center: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            half_length: 10.0,
            nodes: 2000,
            slope_margin: 1e-6,
            boundary_tol: 1e-9,
            tol: 1e-9,
            max_iter: 500,
            regularization: None,
            seed: 0,
            multistart: 0,
            center: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, detail: String| Err(Error::Config(format!("{field}: {detail}")));
        if !(self.half_length > 0.0 && self.half_length.is_finite()) {
            return bad(
                "half_length",
                format!("must be positive and finite, got {}", self.half_length),
            );
        }
        if self.nodes < 16 {
            return bad("nodes", format!("must be at least 16, got {}", self.nodes));
        }
        if !(self.slope_margin > 0.0 && self.slope_margin < 1.0) {
            return bad("slope_margin", format!("must lie in (0, 1), got {}", self.slope_margin));
        }
        if !(self.boundary_tol >= 0.0 && self.boundary_tol < 1.0) {
            return bad("boundary_tol", format!("must lie in [0, 1), got {}", self.boundary_tol));
        }
        if !(self.tol > 0.0) {
            return bad("tol", format!("must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter", "must be positive".into());
        }
        if let Some(n) = self.regularization {
            if n < 2 {
                return bad("regularization", format!("index must be >= 2, got {n}"));
            }
        }
        if !self.center.is_finite() {
            return bad("center", "must be finite".into());
        }
        let rise = 2.0 * (1.0 - self.boundary_tol);
        let reach = 2.0 * self.half_length * (1.0 - self.slope_margin);
        if rise > reach {
            return bad(
                "half_length",
                format!("pinning needs a rise of {rise} but admissible slopes reach only {reach}"),
            );
        }
        Ok(())
    }

    fn kernel(&self) -> Result<Kernel> {
        Ok(match self.regularization {
            Some(n) => Kernel::Regularized(make_regularized(n)?),
            None => Kernel::Relativistic,
        })
    }
}

/// What a minimization run reports besides the profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub final_action: f64,
    pub max_slope: f64,
    /// Present for constant weights only.
    pub conservation_max: Option<f64>,
    pub el_max: Option<f64>,
    pub projected_gradient: f64,
    /// Interior nodes frozen at `±1`.
    pub contact_set: Vec<f64>,
    pub starts: usize,
    pub best_start: usize,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub profile: Profile,
    pub breakdown: ActionBreakdown,
    pub diagnostics: Diagnostics,
}

fn starting_points(t: &[f64], base: &[f64], pinned: &[bool], cfg: &SolverConfig) -> Vec<Vec<f64>> {
    let mut starts = vec![base.to_vec()];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (t0, t1) = (t[0], t[t.len() - 1]);
    for _ in 0..cfg.multistart {
        let modes: Vec<(f64, f64)> = (1..=4)
            .map(|k| (f64::from(k), rng.gen_range(-0.2..0.2) / f64::from(k)))
            .collect();
        let u = t
            .iter()
            .zip(base)
            .zip(pinned)
            .map(|((&ti, &b), &pin)| {
                if pin {
                    return b;
                }
                let x = std::f64::consts::PI * (ti - t0) / (t1 - t0);
                b + modes.iter().map(|(k, c)| c * (k * x).sin()).sum::<f64>()
            })
            .collect();
        starts.push(u);
    }
    starts
}

struct Run {
    u: Vec<f64>,
    iterations: usize,
    residual: f64,
    converged: bool,
    value: f64,
    starts: usize,
    best_start: usize,
}

fn run_starts(problem: &Problem<'_>, starts: Vec<Vec<f64>>, cfg: &SolverConfig) -> Run {
    let count = starts.len();
    let mut best: Option<Run> = None;
    for (k, u0) in starts.into_iter().enumerate() {
        let out = problem.minimize(u0, cfg.tol, cfg.max_iter);
        info!(
            "start {k}: action {:.12e}, residual {:.3e}, {} iterations{}",
            out.value,
            out.residual,
            out.iterations,
            if out.converged { "" } else { " (not converged)" }
        );
        let better = match &best {
            None => true,
            Some(b) => (out.converged && !b.converged) || (out.converged == b.converged && out.value < b.value),
        };
        if better {
            best = Some(Run {
                u: out.u,
                iterations: out.iterations,
                residual: out.residual,
                converged: out.converged,
                value: out.value,
                starts: count,
                best_start: k,
            });
        }
    }
    best.expect("at least one start")
}

fn finish(run: Run, t: Vec<f64>, boxed: bool, w: &Potential, a: &Weight, kernel: &Kernel) -> Result<Solution> {
    let mut profile = Profile::new(t, run.u)?;
    if boxed {
        profile = clamp(&profile);
    }
    if !run.converged {
        return Err(Error::NonConvergence {
            iterations: run.iterations,
            residual: run.residual,
            best_action: run.value,
            best: Box::new(profile),
        });
    }
    let breakdown = action_with_kernel(&profile, w, a, kernel)?;
    let contact_set = profile
        .nodes()
        .iter()
        .zip(profile.values())
        .enumerate()
        .filter(|&(i, (_, u))| i > 0 && i + 1 < profile.len() && u.abs() >= 1.0)
        .map(|(_, (t, _))| *t)
        .collect();
    let conservation_max = match (a.constant, kernel) {
        (Some(c), Kernel::Relativistic) => conservation_residual(&profile, &w.scaled(c)).ok().map(|r| r.max_abs),
        (Some(c), Kernel::Regularized(k)) => Some(regularized_conservation_residual(&profile, &w.scaled(c), k).max_abs),
        (None, _) => None,
    };
    let diagnostics = Diagnostics {
        iterations: run.iterations,
        converged: true,
        final_action: breakdown.total,
        max_slope: profile.max_abs_slope(),
        conservation_max,
        el_max: el_residual(&profile, w, a).ok().map(|r| r.max_abs),
        projected_gradient: run.residual,
        contact_set,
        starts: run.starts,
        best_start: run.best_start,
    };
    Ok(Solution {
        profile,
        breakdown,
        diagnostics,
    })
}

/// Minimizes the discrete action on `[center − L, center + L]` with the
/// endpoints pinned at `∓(1 − δ_bc)`.
pub fn direct_minimize(cfg: &SolverConfig, w: &Potential, a: &Weight) -> Result<Solution> {
    cfg.validate()?;
    let kernel = cfg.kernel()?;
    let t = uniform_nodes(cfg.center - cfg.half_length, cfg.center + cfg.half_length, cfg.nodes);
    let n = t.len();
    let edge = 1.0 - cfg.boundary_tol;
    let mut pinned = vec![false; n];
    pinned[0] = true;
    pinned[n - 1] = true;
    let ramp: Vec<f64> = (0..n).map(|i| -edge + 2.0 * edge * i as f64 / (n - 1) as f64).collect();
    let boxed = w.flags.w2_prime;
    let problem = Problem::new(&t, w, a, kernel, pinned.clone(), 1.0 - cfg.slope_margin, boxed);
    let starts = starting_points(&t, &ramp, &pinned, cfg);
    let run = run_starts(&problem, starts, cfg);
    finish(run, t, boxed, w, a, &kernel)
}

/// Tolerance for the monotonicity of odd minimizers past `T_pos`.
pub const MONOTONE_TOL: f64 = 1e-6;

/// First node index past `t_pos` where the profile drops by more than
/// [`MONOTONE_TOL`], if any.
pub fn first_descent(p: &Profile, t_pos: f64) -> Option<usize> {
    let (t, u) = (p.nodes(), p.values());
    (0..p.cells()).find(|&i| t[i] >= t_pos && u[i + 1] < u[i] - MONOTONE_TOL)
}

/// Restarts from the profile with the first dip past `t_pos` cut out: the
/// tail is pulled back to where it regains the pre-dip value and the end is
/// padded with the pinned value.
fn excised_start(p: &Profile, t_pos: f64) -> Option<Vec<f64>> {
    let i = first_descent(p, t_pos)?;
    let peak = p.values()[i];
    let t_back = {
        let tail = p.restrict(p.nodes()[i + 1], p.t_last()).ok()?;
        tail.first_crossing(peak)?
    };
    let cut = t_back - p.nodes()[i];
    let last = p.values()[p.len() - 1];
    Some(
        p.nodes()
            .iter()
            .map(|&t| {
                if t <= p.nodes()[i] {
                    p.value_at(t)
                } else if t + cut <= p.t_last() {
                    p.value_at(t + cut)
                } else {
                    last
                }
            })
            .collect(),
    )
}

/// Minimizes the half-line action on `[0, L]` with `u(0) = 0` and
/// `u(L) = 1 − δ_bc`. Requires a compactly supported even well and an even
/// weight that is nondecreasing on `t ≥ 0` and positive past its threshold.
pub fn odd_minimize(cfg: &SolverConfig, w: &Potential, a: &Weight) -> Result<Solution> {
    cfg.validate()?;
    let hyp = |hypothesis: &'static str, detail: &str| {
        Err(Error::Hypothesis {
            hypothesis,
            detail: detail.into(),
        })
    };
    if !w.flags.w2_prime {
        return hyp("W2'", "odd minimization needs a potential vanishing outside (-1, 1)");
    }
    if !w.flags.w3 {
        return hyp("W3", "odd minimization needs an even potential");
    }
    if !a.flags.a2 {
        return hyp("a2", "odd minimization needs a weight nondecreasing on t >= 0");
    }
    if !a.flags.a3 {
        return hyp("a3", "odd minimization needs an even weight");
    }
    let Some(t_pos) = a.positivity_threshold.filter(|_| a.flags.a4) else {
        return hyp("a4", "odd minimization needs a recorded positivity threshold");
    };
    let kernel = cfg.kernel()?;
    let n = cfg.nodes.div_ceil(2);
    let t = uniform_nodes(0.0, cfg.half_length, n);
    let edge = 1.0 - cfg.boundary_tol;
    let mut pinned = vec![false; n];
    pinned[0] = true;
    pinned[n - 1] = true;
    let ramp: Vec<f64> = (0..n).map(|i| edge * i as f64 / (n - 1) as f64).collect();
    let problem = Problem::new(&t, w, a, kernel, pinned.clone(), 1.0 - cfg.slope_margin, true);
    let starts = starting_points(&t, &ramp, &pinned, cfg);
    let mut run = run_starts(&problem, starts, cfg);
    let candidate = clamp(&Profile::new(t.clone(), run.u.clone())?);
    if run.converged {
        if let Some(u0) = excised_start(&candidate, t_pos) {
            let out = problem.minimize(u0, cfg.tol, cfg.max_iter);
            if out.converged && out.value < run.value {
                info!(
                    "excision lowered the half-line action from {:.12e} to {:.12e}",
                    run.value, out.value
                );
                run.u = out.u;
                run.value = out.value;
                run.iterations += out.iterations;
                run.residual = out.residual;
            }
        }
    }
    let sol = finish(run, t, true, w, a, &kernel)?;
    if let Some(i) = first_descent(&sol.profile, t_pos) {
        warn!("odd minimizer decreases past T_pos at t = {}", sol.profile.nodes()[i]);
    }
    Ok(sol)
}
