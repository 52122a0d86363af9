//! Minimal heteroclinic transitions for the relativistic action
//!
//! ```text
//! ∫ (1 − √(1 − u′²) + a(t) W(u)) dt
//! ```
//!
//! joining the wells `u = −1` and `u = +1` of a double-well potential `W`.
//! The crate evaluates discrete actions and their residuals, applies the
//! classical surgeries (rearrangement, stretching, excision, odd extension),
//! and computes heteroclinics by quadrature, direct minimization and
//! shooting.

// `!(x > 0.0)` is deliberate throughout: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expr;
pub mod functional;
pub mod io;
pub mod kernel;
pub mod potentials;
pub mod solver;
pub mod transforms;
pub mod weights;

pub use error::{Error, Result};
pub use functional::{ActionBreakdown, Profile};
pub use potentials::Potential;
pub use weights::Weight;
