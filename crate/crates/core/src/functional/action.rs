use serde::{Deserialize, Serialize};

use super::{pairwise_sum, Profile};
use crate::error::{Error, Result};
use crate::kernel::{snap_slope, Kernel, RegularizedKernel};
use crate::potentials::Potential;
use crate::weights::Weight;

/// Kinetic and potential parts of a discrete action, with per-cell terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
    /// `(kinetic, potential)` contribution of each cell.
    pub cells: Vec<(f64, f64)>,
}

impl ActionBreakdown {
    fn from_cells(cells: Vec<(f64, f64)>) -> Self {
        let k: Vec<f64> = cells.iter().map(|c| c.0).collect();
        let p: Vec<f64> = cells.iter().map(|c| c.1).collect();
        let kinetic = pairwise_sum(&k);
        let potential = pairwise_sum(&p);
        ActionBreakdown {
            kinetic,
            potential,
            total: kinetic + potential,
            cells,
        }
    }
}

/// `Σ g(sᵢ)Δtᵢ + Σ a(t_mid) W(u_mid) Δtᵢ`: exact kinetic term for the
/// piecewise-linear interpolant, midpoint rule for the potential.
pub fn action(p: &Profile, w: &Potential, a: &Weight) -> Result<ActionBreakdown> {
    action_with_kernel(p, w, a, &Kernel::Relativistic)
}

/// The autonomous action with `Ψₙ` in place of `g`.
pub fn regularized_action(p: &Profile, w: &Potential, k: &RegularizedKernel) -> Result<ActionBreakdown> {
    action_with_kernel(p, w, &crate::weights::constant(1.0)?, &Kernel::Regularized(*k))
}

pub fn action_with_kernel(p: &Profile, w: &Potential, a: &Weight, kernel: &Kernel) -> Result<ActionBreakdown> {
    let (t, u) = (p.nodes(), p.values());
    let mut cells = Vec::with_capacity(p.cells());
    for i in 0..p.cells() {
        let h = t[i + 1] - t[i];
        let s = (u[i + 1] - u[i]) / h;
        let density = match kernel {
            Kernel::Relativistic => {
                let s = snap_slope(s, Some(i))?;
                1.0 - ((1.0 - s) * (1.0 + s)).sqrt()
            }
            Kernel::Regularized(k) => k.psi(s),
        };
        let tm = 0.5 * (t[i] + t[i + 1]);
        let um = 0.5 * (u[i] + u[i + 1]);
        let pot = a.at(tm) * w.w(um) * h;
        if !pot.is_finite() {
            return Err(Error::Profile(format!(
                "potential term is not finite in cell {i} (u = {um}, t = {tm})"
            )));
        }
        cells.push((density * h, pot));
    }
    Ok(ActionBreakdown::from_cells(cells))
}

/// `∂F/∂uⱼ` of the discrete action at every node, endpoints included.
pub fn action_gradient(p: &Profile, w: &Potential, a: &Weight, kernel: &Kernel) -> Vec<f64> {
    let n = p.len();
    crate::solver::problem_for(p.nodes(), w, a, *kernel, vec![false; n]).gradient(p.values())
}
