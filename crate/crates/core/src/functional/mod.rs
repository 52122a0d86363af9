//! Discrete actions, first-integral and Euler–Lagrange residuals, and the
//! two-dimensional strip functional.

mod action;
mod profile;
mod residuals;
mod strip;

pub use action::{action, action_gradient, action_with_kernel, regularized_action, ActionBreakdown};
pub(crate) use profile::uniform_nodes;
pub use profile::Profile;
pub use residuals::{
    conservation_residual, crossing_lower_bound, derivative_bound, derivative_bound_squared, el_residual,
    regularized_conservation_residual, Residuals,
};
pub use strip::{action_2d, slice_compare, SliceReport, StripGrid};

/// Pairwise (cascade) summation. The split is fixed by the length alone, so
/// the result is bit-reproducible for a given input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
