//! Projected damped Newton on the discrete action.
//!
//! The action is a sum of per-cell terms, so its Hessian is tridiagonal. The
//! kinetic part is differentiated exactly; the potential curvature `W''` is
//! taken by central differences of `W'`. Indefinite steps are damped
//! Levenberg–Marquardt style, and every trial point is projected back onto
//! the slope polytope (and the box `[-1, 1]` when requested).

use log::{debug, trace};

use crate::functional::pairwise_sum;
use crate::kernel::Kernel;
use crate::potentials::Potential;
use crate::weights::Weight;

const MAX_SWEEPS: usize = 50;
const ARMIJO: f64 = 1e-4;
const FD_STEP: f64 = 1e-6;

pub(crate) struct Problem<'a> {
    pub w: &'a Potential,
    a_mid: Vec<f64>,
    h: Vec<f64>,
    pub kernel: Kernel,
    pub pinned: Vec<bool>,
    pub cap: f64,
    pub boxed: bool,
}

pub(crate) struct Outcome {
    pub u: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl<'a> Problem<'a> {
    pub fn new(
        t: &[f64],
        w: &'a Potential,
        a: &Weight,
        kernel: Kernel,
        pinned: Vec<bool>,
        cap: f64,
        boxed: bool,
    ) -> Self {
        let h: Vec<f64> = t.windows(2).map(|c| c[1] - c[0]).collect();
        let a_mid = t.windows(2).map(|c| a.at(0.5 * (c[0] + c[1]))).collect();
        Problem {
            w,
            a_mid,
            h,
            kernel,
            pinned,
            cap,
            boxed,
        }
    }

    fn cells(&self) -> usize {
        self.h.len()
    }

    fn density(&self, s: f64) -> f64 {
        match self.kernel {
            Kernel::Relativistic => {
                if s.abs() > 1.0 {
                    f64::INFINITY
                } else {
                    1.0 - ((1.0 - s) * (1.0 + s)).sqrt()
                }
            }
            Kernel::Regularized(k) => k.psi(s),
        }
    }

    fn flux(&self, s: f64) -> f64 {
        match self.kernel {
            Kernel::Relativistic => s / ((1.0 - s) * (1.0 + s)).sqrt(),
            Kernel::Regularized(k) => k.psi_deriv(s),
        }
    }

    fn curvature(&self, s: f64) -> f64 {
        match self.kernel {
            Kernel::Relativistic => {
                let r = (1.0 - s) * (1.0 + s);
                1.0 / (r * r.sqrt())
            }
            Kernel::Regularized(k) => k.psi_second(s),
        }
    }

    fn w_second(&self, m: f64) -> f64 {
        let d = FD_STEP * m.abs().max(1.0);
        (self.w.dw(m + d) - self.w.dw(m - d)) / (2.0 * d)
    }

    /// The discrete action; `NaN` or `+∞` flags an inadmissible point.
    pub fn value(&self, u: &[f64]) -> f64 {
        let terms: Vec<f64> = (0..self.cells())
            .map(|i| {
                let h = self.h[i];
                let s = (u[i + 1] - u[i]) / h;
                let m = 0.5 * (u[i] + u[i + 1]);
                (self.density(s) + self.a_mid[i] * self.w.w(m)) * h
            })
            .collect();
        pairwise_sum(&terms)
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let n = self.cells();
        let mut g = vec![0.0; n + 1];
        for i in 0..n {
            let h = self.h[i];
            let s = (u[i + 1] - u[i]) / h;
            let m = 0.5 * (u[i] + u[i + 1]);
            let p = self.flux(s);
            let f = 0.5 * h * self.a_mid[i] * self.w.dw(m);
            g[i] += f - p;
            g[i + 1] += f + p;
        }
        for (gi, &pin) in g.iter_mut().zip(&self.pinned) {
            if pin {
                *gi = 0.0;
            }
        }
        g
    }

    /// Diagonal and super-diagonal of the Hessian.
    fn hessian(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.cells();
        let mut d = vec![0.0; n + 1];
        let mut e = vec![0.0; n];
        for i in 0..n {
            let h = self.h[i];
            let s = (u[i + 1] - u[i]) / h;
            let m = 0.5 * (u[i] + u[i + 1]);
            let k = self.curvature(s) / h;
            let q = 0.25 * h * self.a_mid[i] * self.w_second(m);
            d[i] += k + q;
            d[i + 1] += k + q;
            e[i] = q - k;
        }
        (d, e)
    }

    /// Cyclic clipping onto `|sᵢ| ≤ cap`, plus the box when enabled.
    pub fn project(&self, u: &mut [f64]) {
        let clip_box = |u: &mut [f64]| {
            if self.boxed {
                for (v, &pin) in u.iter_mut().zip(&self.pinned) {
                    if !pin {
                        *v = v.clamp(-1.0, 1.0);
                    }
                }
            }
        };
        clip_box(u);
        for _ in 0..MAX_SWEEPS {
            let mut changed = false;
            for i in 0..self.cells() {
                let lim = self.cap * self.h[i];
                let du = u[i + 1] - u[i];
                if du.abs() <= lim {
                    continue;
                }
                let excess = (du.abs() - lim) * du.signum();
                match (self.pinned[i], self.pinned[i + 1]) {
                    (false, false) => {
                        u[i] += 0.5 * excess;
                        u[i + 1] -= 0.5 * excess;
                    }
                    (true, false) => u[i + 1] -= excess,
                    (false, true) => u[i] += excess,
                    (true, true) => continue,
                }
                changed = true;
            }
            clip_box(u);
            if !changed {
                break;
            }
        }
    }

    /// `‖(u − P(u − τg))/τ‖∞ / h` with `τ = h`: Euler–Lagrange units.
    pub fn projected_gradient(&self, u: &[f64], g: &[f64]) -> f64 {
        let tau = self.h.iter().copied().fold(f64::INFINITY, f64::min);
        let mut trial: Vec<f64> = u.iter().zip(g).map(|(x, gx)| x - tau * gx).collect();
        self.project(&mut trial);
        u.iter()
            .zip(&trial)
            .zip(&self.pinned)
            .filter(|(_, &pin)| !pin)
            .map(|((x, y), _)| ((x - y) / tau).abs())
            .fold(0.0, f64::max)
            / tau
    }

    /// Nodes on the box boundary whose gradient points outward.
    fn active(&self, u: &[f64], g: &[f64]) -> Vec<bool> {
        (0..u.len())
            .map(|j| self.pinned[j] || (self.boxed && ((u[j] >= 1.0 && g[j] < 0.0) || (u[j] <= -1.0 && g[j] > 0.0))))
            .collect()
    }

    pub fn minimize(&self, mut u: Vec<f64>, tol: f64, max_iter: usize) -> Outcome {
        self.project(&mut u);
        let mut f = self.value(&u);
        let mut mu = 0.0;
        let mut iterations = 0;
        while iterations < max_iter {
            let g = self.gradient(&u);
            let residual = self.projected_gradient(&u, &g);
            trace!("iter {iterations}: action {f:.15e}, residual {residual:.3e}, mu {mu:.1e}");
            if residual <= tol {
                return Outcome {
                    u,
                    value: f,
                    iterations,
                    residual,
                    converged: true,
                };
            }
            iterations += 1;
            let frozen = self.active(&u, &g);
            let (d, e) = self.hessian(&u);
            let scale = d.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
            mu = if mu > 0.0 { mu * 0.1 } else { 0.0 };
            let mut accepted = None;
            for _ in 0..40 {
                if let Some(dir) = solve_tridiagonal(&d, &e, &g, &frozen, mu) {
                    let slope: f64 = dir.iter().zip(&g).map(|(a, b)| a * b).sum();
                    if slope < 0.0 {
                        if let Some(step) = self.line_search(&u, f, &g, &dir, residual) {
                            accepted = Some(step);
                            break;
                        }
                    }
                }
                mu = (mu * 10.0).max(1e-12 * scale);
                if mu > 1e20 * scale {
                    break;
                }
            }
            match accepted {
                Some((next, fv)) => {
                    u = next;
                    f = fv;
                }
                None => {
                    debug!("line search stalled at residual {residual:.3e}");
                    break;
                }
            }
        }
        let g = self.gradient(&u);
        let residual = self.projected_gradient(&u, &g);
        Outcome {
            u,
            value: f,
            iterations,
            converged: residual <= tol,
            residual,
        }
    }

    fn line_search(&self, u: &[f64], f: f64, g: &[f64], dir: &[f64], residual: f64) -> Option<(Vec<f64>, f64)> {
        let mut alpha = 1.0;
        for _ in 0..40 {
            let mut trial: Vec<f64> = u.iter().zip(dir).map(|(x, d)| x + alpha * d).collect();
            self.project(&mut trial);
            let ft = self.value(&trial);
            if ft.is_finite() {
                let pred: f64 = trial.iter().zip(u).zip(g).map(|((y, x), gx)| gx * (y - x)).sum();
                if pred < 0.0 && ft <= f + ARMIJO * pred {
                    return Some((trial, ft));
                }
                // At round-off level the action cannot resolve progress;
                // fall back on the optimality measure.
                if (ft - f).abs() <= 1e-13 * f.abs().max(1.0) {
                    let gt = self.gradient(&trial);
                    if self.projected_gradient(&trial, &gt) < residual {
                        return Some((trial, ft));
                    }
                }
            }
            alpha *= 0.5;
        }
        None
    }
}

/// Solves `(H + μI) x = −g` on the free nodes by `LDLᵀ`; `None` when a pivot
/// is not positive.
fn solve_tridiagonal(d: &[f64], e: &[f64], g: &[f64], frozen: &[bool], mu: f64) -> Option<Vec<f64>> {
    let n = d.len();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut rhs = vec![0.0; n];
    for j in 0..n {
        if frozen[j] {
            diag[j] = 1.0;
        } else {
            diag[j] = d[j] + mu;
            rhs[j] = -g[j];
        }
    }
    for j in 0..n - 1 {
        if !frozen[j] && !frozen[j + 1] {
            off[j] = e[j];
        }
    }
    let mut piv = vec![0.0; n];
    let mut l = vec![0.0; n];
    piv[0] = diag[0];
    if !(piv[0] > 0.0) {
        return None;
    }
    for j in 1..n {
        l[j] = off[j - 1] / piv[j - 1];
        piv[j] = diag[j] - l[j] * off[j - 1];
        if !(piv[j] > 1e-14 * diag[j].abs()) {
            return None;
        }
    }
    let mut y = rhs;
    for j in 1..n {
        y[j] -= l[j] * y[j - 1];
    }
    let mut x = vec![0.0; n];
    x[n - 1] = y[n - 1] / piv[n - 1];
    for j in (0..n - 1).rev() {
        x[j] = y[j] / piv[j] - l[j + 1] * x[j + 1];
    }
    for j in 0..n {
        if frozen[j] {
            x[j] = 0.0;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve_matches_dense() {
        let d = [4.0, 5.0, 6.0, 7.0];
        let e = [1.0, -2.0, 0.5];
        let g = [1.0, -1.0, 2.0, 0.0];
        let x = solve_tridiagonal(&d, &e, &g, &[false; 4], 0.0).unwrap();
        for j in 0..4 {
            let mut r = d[j] * x[j] + g[j];
            if j > 0 {
                r += e[j - 1] * x[j - 1];
            }
            if j < 3 {
                r += e[j] * x[j + 1];
            }
            assert!(r.abs() < 1e-14, "row {j}: {r}");
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        assert!(solve_tridiagonal(&[1.0, 1.0], &[2.0], &[0.0, 0.0], &[false; 2], 0.0).is_none());
        assert!(solve_tridiagonal(&[1.0, 1.0], &[2.0], &[0.0, 0.0], &[false; 2], 2.0).is_some());
    }
}
