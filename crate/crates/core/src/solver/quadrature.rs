//! Heteroclinic by quadrature of the first integral.
//!
//! Along an autonomous heteroclinic `1 − 1/√(1−u′²) + W(u) = 0`, so
//! `u′ = √(W(2+W))/(1+W)` as a function of `u`. Time is recovered as
//! `t(u) = ∫₀ᵘ dv/u′(v)`. Rather than tabulating `t(u)` and interpolating, the
//! profile is marched on a uniform time grid: each increment solves
//! `∫_{u_k}^{u_{k+1}} dv/u′(v) = step` by Newton's method.

use crate::error::{Error, Result};
use crate::functional::Profile;
use crate::potentials::Potential;

/// `u′` as a function of `u` on an autonomous heteroclinic.
pub fn speed(w: &Potential, u: f64) -> f64 {
    let v = w.w(u);
    (v * (2.0 + v)).sqrt() / (1.0 + v)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Adaptive Simpson with Richardson correction.
#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

pub(crate) fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Values `u(k·step)`, `k = 0, 1, …`, from `u(0) = 0` towards `target`,
/// stopping once less than one step of time remains.
fn march(rate: &dyn Fn(f64) -> f64, target: f64, step: f64) -> Result<Vec<f64>> {
    let inv = |v: f64| 1.0 / rate(v);
    let total = integrate(&inv, 0.0, target, 1e-13);
    if !total.is_finite() {
        return Err(Error::Integration(format!("travel time to u = {target} is not finite")));
    }
    let steps = (total / step).floor() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(0.0);
    let mut cur: f64 = 0.0;
    for _ in 0..steps {
        let mut x = (cur + step * rate(cur)).min(target);
        for _ in 0..60 {
            let resid = integrate(&inv, cur, x, 1e-17) - step;
            let dx = resid * rate(x);
            let next = (x - dx).clamp(cur, target);
            let done = (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300);
            x = next;
            if done {
                break;
            }
        }
        cur = x;
        out.push(cur);
    }
    Ok(out)
}

/// The heteroclinic of `1 − 1/√(1−u′²) + W(u) = 0` with `u(0) = 0`, sampled
/// at spacing `step` until it comes within one step of `±(1 − δ_bc)`.
///
/// The two halves are marched separately; the left half uses `W(−v)`, so an
/// even potential yields an exactly odd profile.
pub fn quadrature_heteroclinic(w: &Potential, delta_bc: f64, step: f64) -> Result<Profile> {
    if !(delta_bc > 0.0 && delta_bc < 1.0) {
        return Err(Error::Parameter(format!(
            "boundary tolerance must lie in (0, 1), got {delta_bc}"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Parameter(format!("step must be positive, got {step}")));
    }
    let target = 1.0 - delta_bc;
    const SCAN: usize = 100_000;
    for k in 0..=SCAN {
        let u = -target + 2.0 * target * k as f64 / SCAN as f64;
        if !(w.w(u) > 0.0) {
            return Err(Error::DegenerateWell { u });
        }
    }
    let right = march(&|v| speed(w, v), target, step)?;
    let left = march(&|v| speed(w, -v), target, step)?;
    let k_left = left.len() - 1;
    let mut nodes = Vec::with_capacity(left.len() + right.len() - 1);
    let mut values = Vec::with_capacity(nodes.capacity());
    for (k, v) in left.iter().enumerate().skip(1).rev() {
        nodes.push(-(k as f64) * step);
        values.push(-v);
    }
    for (k, v) in right.iter().enumerate() {
        nodes.push(k as f64 * step);
        values.push(*v);
    }
    debug_assert_eq!(nodes.len(), k_left + right.len());
    Profile::new(nodes, values)
}
