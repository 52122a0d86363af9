//! Phase-space integration of `u′ = p/√(1+p²)`, `p′ = a(t)W′(u)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::Profile;
use crate::kernel::slope_from_momentum;
use crate::potentials::Potential;
use crate::weights::Weight;

/// Position and relativistic momentum `p = u′/√(1−u′²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub u: f64,
    pub p: f64,
}

impl PhaseState {
    /// `u′`, always strictly inside `(-1, 1)`.
    pub fn velocity(&self) -> f64 {
        slope_from_momentum(self.p)
    }
}

fn field(s: PhaseState, t: f64, w: &Potential, a: &Weight) -> (f64, f64) {
    (slope_from_momentum(s.p), a.at(t) * w.dw(s.u))
}

/// One classical Runge–Kutta step from `t` to `t + dt` (`dt` may be negative).
pub fn phase_flow_step(s: PhaseState, t: f64, dt: f64, w: &Potential, a: &Weight) -> Result<PhaseState> {
    if t + dt == t {
        return Err(Error::Integration(format!("step {dt} underflows at t = {t}")));
    }
    let at = |s: PhaseState, c: f64, k: (f64, f64)| PhaseState {
        u: s.u + c * k.0,
        p: s.p + c * k.1,
    };
    let k1 = field(s, t, w, a);
    let k2 = field(at(s, 0.5 * dt, k1), t + 0.5 * dt, w, a);
    let k3 = field(at(s, 0.5 * dt, k2), t + 0.5 * dt, w, a);
    let k4 = field(at(s, dt, k3), t + dt, w, a);
    let next = PhaseState {
        u: s.u + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        p: s.p + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    };
    if !(next.u.is_finite() && next.p.is_finite()) {
        return Err(Error::Integration(format!("state left the finite range near t = {t}")));
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
}

impl Trajectory {
    pub fn to_profile(&self) -> Result<Profile> {
        Profile::new(self.t.clone(), self.u.clone())
    }

    pub fn state(&self, k: usize) -> PhaseState {
        PhaseState {
            u: self.u[k],
            p: self.p[k],
        }
    }
}

/// Integrates from `t_span.0` to `t_span.1` with steps no longer than `|dt|`,
/// landing exactly on the end time. The span may run backwards.
pub fn shoot(start: PhaseState, t_span: (f64, f64), dt: f64, w: &Potential, a: &Weight) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    if !(dt.abs() > 0.0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Parameter(format!(
            "shooting needs a finite span and nonzero step (dt = {dt})"
        )));
    }
    let n = ((t1 - t0).abs() / dt.abs()).ceil().max(1.0) as usize;
    let h = (t1 - t0) / n as f64;
    let mut tr = Trajectory {
        t: Vec::with_capacity(n + 1),
        u: Vec::with_capacity(n + 1),
        p: Vec::with_capacity(n + 1),
    };
    let mut s = start;
    tr.t.push(t0);
    tr.u.push(s.u);
    tr.p.push(s.p);
    for k in 0..n {
        let t = t0 + h * k as f64;
        s = phase_flow_step(s, t, h, w, a)?;
        tr.t.push(if k + 1 == n { t1 } else { t0 + h * (k + 1) as f64 });
        tr.u.push(s.u);
        tr.p.push(s.p);
    }
    Ok(tr)
}

/// Launches at `t_launch` and integrates both ways to cover `t_span`,
/// returning one trajectory in increasing time.
pub fn shoot_two_sided(
    start: PhaseState,
    t_launch: f64,
    t_span: (f64, f64),
    dt: f64,
    w: &Potential,
    a: &Weight,
) -> Result<Trajectory> {
    let (lo, hi) = t_span;
    if !(lo <= t_launch && t_launch <= hi) {
        return Err(Error::Parameter(format!("launch time {t_launch} outside [{lo}, {hi}]")));
    }
    let dt = dt.abs();
    let back = if lo < t_launch {
        Some(shoot(start, (t_launch, lo), dt, w, a)?)
    } else {
        None
    };
    let fwd = if hi > t_launch {
        Some(shoot(start, (t_launch, hi), dt, w, a)?)
    } else {
        None
    };
    let mut tr = Trajectory {
        t: Vec::new(),
        u: Vec::new(),
        p: Vec::new(),
    };
    if let Some(b) = &back {
        for k in (1..b.t.len()).rev() {
            tr.t.push(b.t[k]);
            tr.u.push(b.u[k]);
            tr.p.push(b.p[k]);
        }
    }
    tr.t.push(t_launch);
    tr.u.push(start.u);
    tr.p.push(start.p);
    if let Some(f) = &fwd {
        tr.t.extend_from_slice(&f.t[1..]);
        tr.u.extend_from_slice(&f.u[1..]);
        tr.p.extend_from_slice(&f.p[1..]);
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{allen_cahn, compact_truncate, exact_example};
    use crate::weights::constant;
    use std::f64::consts::SQRT_2;

    #[test]
    fn free_flight_is_linear() {
        let w = compact_truncate(&allen_cahn());
        let a = constant(1.0).unwrap();
        let s = PhaseState { u: 2.0, p: 0.75 };
        let tr = shoot(s, (0.0, 3.0), 0.1, &w, &a).unwrap();
        for k in 0..tr.t.len() {
            assert!((tr.p[k] - 0.75).abs() < 1e-15);
            assert!((tr.u[k] - (2.0 + 0.6 * tr.t[k])).abs() < 1e-13);
        }
    }

    #[test]
    fn tracks_the_exact_orbit() {
        let w = exact_example();
        let a = constant(1.0).unwrap();
        let tr = shoot(PhaseState { u: 0.0, p: 1.0 }, (0.0, 8.0), 1e-3, &w, &a).unwrap();
        let err =
            tr.t.iter()
                .zip(&tr.u)
                .map(|(t, u)| (u - (t / SQRT_2).tanh()).abs())
                .fold(0.0, f64::max);
        assert!(err <= 1e-6, "{err}");
        assert!(tr.p.iter().all(|&p| slope_from_momentum(p).abs() < 1.0));
    }

    #[test]
    fn forward_then_backward_returns() {
        let w = allen_cahn();
        let a = constant(1.0).unwrap();
        let s0 = PhaseState { u: 0.1, p: 0.3 };
        let f = shoot(s0, (0.0, 2.0), 1e-3, &w, &a).unwrap();
        let end = f.state(f.t.len() - 1);
        let b = shoot(end, (2.0, 0.0), 1e-3, &w, &a).unwrap();
        let back = b.state(b.t.len() - 1);
        assert!((back.u - s0.u).abs() < 1e-9 && (back.p - s0.p).abs() < 1e-9);
    }

    #[test]
    fn two_sided_is_sorted() {
        let w = exact_example();
        let a = constant(1.0).unwrap();
        let tr = shoot_two_sided(PhaseState { u: 0.0, p: 1.0 }, 0.0, (-3.0, 3.0), 1e-2, &w, &a).unwrap();
        assert!(tr.t.windows(2).all(|c| c[1] > c[0]));
        assert_eq!(tr.t.len(), 601);
        assert!(tr.to_profile().is_ok());
    }

    #[test]
    fn underflow_is_an_error() {
        let w = allen_cahn();
        let a = constant(1.0).unwrap();
        let s = PhaseState { u: 0.0, p: 0.0 };
        assert!(matches!(
            phase_flow_step(s, 1e20, 1.0, &w, &a),
            Err(Error::Integration(_))
        ));
    }
}
