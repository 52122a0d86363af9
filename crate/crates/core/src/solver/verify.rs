//! Necessary conditions a computed minimizer should satisfy, bundled into
//! one pass/fail report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::functional::{action, conservation_residual, crossing_lower_bound, derivative_bound, el_residual, Profile};
use crate::potentials::{beta_eps, Potential};
use crate::transforms::{rearrange, stretch_graph};
use crate::weights::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

impl Check {
    fn cmp(name: &str, value: f64, threshold: f64, ok: bool, detail: String) -> Check {
        Check {
            name: name.into(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            value: Some(value),
            threshold: Some(threshold),
            detail,
        }
    }

    fn skip(name: &str, detail: &str) -> Check {
        Check {
            name: name.into(),
            status: CheckStatus::NotApplicable,
            value: None,
            threshold: None,
            detail: detail.into(),
        }
    }

    fn fail(name: &str, detail: String) -> Check {
        Check {
            name: name.into(),
            status: CheckStatus::Fail,
            value: None,
            threshold: None,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub action: f64,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub slope_tol: f64,
    pub conservation_tol: f64,
    pub el_tol: f64,
    pub stretch_tol: f64,
    pub rearrange_tol: f64,
    pub thetas: Vec<f64>,
    pub bands: usize,
    pub eps: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            slope_tol: 1e-3,
            conservation_tol: 1e-3,
            el_tol: 1e-3,
            stretch_tol: 1e-4,
            rearrange_tol: 1e-12,
            thetas: vec![0.1, 0.01],
            bands: 20,
            eps: 0.2,
            seed: 0,
        }
    }
}

/// Worst first-variation quotient `[𝒥(u_θ) − 𝒥(u)]/(t₁ − t₀)` over seeded
/// random node-aligned bands. The unstretched profile is extended by its end
/// value so both sides live on the same interval.
pub fn stretch_quotient(
    p: &Profile,
    w: &Potential,
    a: &Weight,
    opts: &VerifyOptions,
) -> crate::Result<(f64, f64, f64, f64)> {
    let base = action(p, w, a)?.total;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cells = p.cells();
    let mut worst = (f64::INFINITY, 0.0, 0.0, 0.0);
    for _ in 0..opts.bands {
        let i0 = rng.gen_range(1..cells - 1);
        let len = rng.gen_range(1..=((cells / 4).max(1)).min(cells - 1 - i0));
        let (t0, t1) = (p.nodes()[i0], p.nodes()[i0 + len]);
        for &theta in &opts.thetas {
            let q = stretch_graph(p, t0, t1, theta)?;
            let extra = q.t_last() - p.t_last();
            let last = p.values()[p.len() - 1];
            let tail = Profile::new(vec![p.t_last(), p.t_last() + extra], vec![last, last])?;
            let ext = base + action(&tail, w, a)?.total;
            let quot = (action(&q, w, a)?.total - ext) / (t1 - t0);
            if quot < worst.0 {
                worst = (quot, t0, t1, theta);
            }
        }
    }
    Ok(worst)
}

/// Runs every applicable check on `p`. Conservation and the slope bound need
/// a constant weight.
pub fn verify_minimizer(p: &Profile, w: &Potential, a: &Weight, opts: &VerifyOptions) -> VerificationReport {
    let mut checks = Vec::new();
    let total = match action(p, w, a) {
        Ok(b) => b.total,
        Err(e) => {
            return VerificationReport {
                pass: false,
                action: f64::NAN,
                checks: vec![Check::fail("action", e.to_string())],
            }
        }
    };
    let scaled = a.constant.filter(|&c| c > 0.0).map(|c| w.scaled(c));

    match &scaled {
        Some(ws) => {
            let bound = derivative_bound(ws);
            let m = p.max_abs_slope();
            checks.push(Check::cmp(
                "slope_bound",
                m,
                bound + opts.slope_tol,
                m <= bound + opts.slope_tol,
                format!("max |s| = {m:.6}, bound {bound:.6}"),
            ));
            checks.push(match conservation_residual(p, ws) {
                Ok(r) => Check::cmp(
                    "conservation",
                    r.max_abs,
                    opts.conservation_tol,
                    r.max_abs <= opts.conservation_tol,
                    format!("max residual {:.3e}", r.max_abs),
                ),
                Err(e) => Check::fail("conservation", e.to_string()),
            });
        }
        None => {
            let why = "weight is not a positive constant; energy is not conserved";
            checks.push(Check::skip("slope_bound", why));
            checks.push(Check::skip("conservation", why));
        }
    }

    checks.push(match el_residual(p, w, a) {
        Ok(r) => Check::cmp(
            "euler_lagrange",
            r.max_abs,
            opts.el_tol,
            r.max_abs <= opts.el_tol,
            format!("max residual {:.3e}", r.max_abs),
        ),
        Err(e) => Check::fail("euler_lagrange", e.to_string()),
    });

    checks.push(if p.cells() < 3 || opts.bands == 0 {
        Check::skip("stretch", "grid too small for interior bands")
    } else {
        match stretch_quotient(p, w, a, opts) {
            Ok((q, t0, t1, theta)) => Check::cmp(
                "stretch",
                q,
                -opts.stretch_tol,
                q >= -opts.stretch_tol,
                format!("worst quotient {q:.3e} on [{t0:.4}, {t1:.4}] at theta {theta}"),
            ),
            Err(e) => Check::fail("stretch", e.to_string()),
        }
    });

    checks.push(match rearrange(p) {
        Ok(r) => match action(&r, w, a) {
            Ok(b) => {
                let drop = total - b.total;
                let tol = opts.rearrange_tol * total.abs().max(1.0);
                Check::cmp(
                    "rearrange",
                    drop,
                    tol,
                    drop <= tol,
                    format!("action drop under rearrangement {drop:.3e}"),
                )
            }
            Err(e) => Check::fail("rearrange", e.to_string()),
        },
        Err(_) => Check::skip("rearrange", "grid is not uniform"),
    });

    checks.push(crossing_check(p, w, a, total, opts.eps));

    let pass = checks.iter().all(|c| c.status != CheckStatus::Fail);
    VerificationReport {
        pass,
        action: total,
        checks,
    }
}

fn crossing_check(p: &Profile, w: &Potential, a: &Weight, total: f64, eps: f64) -> Check {
    let name = "crossing_bound";
    let Some(t1) = p.first_crossing(1.0 - eps) else {
        return Check::skip(name, "profile never reaches 1 - eps");
    };
    let Some(t2) = p
        .restrict(t1, p.t_last())
        .ok()
        .and_then(|r| r.first_crossing(1.0 - eps / 2.0))
    else {
        return Check::skip(name, "profile never reaches 1 - eps/2");
    };
    let a1 = p
        .nodes()
        .iter()
        .filter(|&&t| t > t1 && t < t2)
        .chain([t1, t2].iter())
        .map(|&t| a.at(t))
        .fold(f64::INFINITY, f64::min);
    let beta = match beta_eps(w, eps) {
        Ok(b) => b,
        Err(e) => return Check::fail(name, e.to_string()),
    };
    match crossing_lower_bound(eps, a1, beta) {
        Ok(bound) => Check::cmp(
            name,
            total,
            bound,
            total >= bound,
            format!("crossing [{t1:.4}, {t2:.4}], inf a = {a1:.6}, beta = {beta:.6e}, bound {bound:.6e}"),
        ),
        Err(_) => Check::skip(name, "weight is not positive on the crossing interval"),
    }
}
