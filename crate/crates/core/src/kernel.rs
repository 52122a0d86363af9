//! Relativistic Lagrangian density and its C² regularizations.
//!
//! The kinetic density of the action is `g(s) = 1 - sqrt(1 - s^2)`, defined
//! for `|s| <= 1` with a flux `g'(s) = s / sqrt(1 - s^2)` that blows up at
//! the light-cone `|s| = 1`. The regularized family `Ψₙ(t) = hₙ(t²)` agrees
//! with `g` for `t² <= 1 - 1/n²` and continues it by a quadratic in `t²`
//! that matches value, first and second derivatives at the junction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slopes within this distance beyond `±1` are snapped back onto the light-cone.
pub const SLOPE_EPS: f64 = 1e-12;

/// `g(s) = 1 - sqrt(1 - s²)`.
pub fn g(s: f64) -> Result<f64> {
    let s = snap_slope(s, None)?;
    Ok(1.0 - ((1.0 - s) * (1.0 + s)).sqrt())
}

/// The flux `g'(s) = s / sqrt(1 - s²)`, i.e. the relativistic momentum.
pub fn g_prime(s: f64) -> Result<f64> {
    if !(s.abs() < 1.0) {
        return Err(Error::Singularity { slope: s, cell: None });
    }
    Ok(s / ((1.0 - s) * (1.0 + s)).sqrt())
}

/// `g''(s) = (1 - s²)^{-3/2}`.
pub fn g_second(s: f64) -> Result<f64> {
    if !(s.abs() < 1.0) {
        return Err(Error::Singularity { slope: s, cell: None });
    }
    let r = (1.0 - s) * (1.0 + s);
    Ok(1.0 / (r * r.sqrt()))
}

/// Inverse of the flux map: the slope carried by momentum `p`. Always `|s| < 1`.
pub fn slope_from_momentum(p: f64) -> f64 {
    p / (1.0 + p * p).sqrt()
}

pub(crate) fn snap_slope(s: f64, cell: Option<usize>) -> Result<f64> {
    let a = s.abs();
    if a <= 1.0 {
        Ok(s)
    } else if a <= 1.0 + SLOPE_EPS {
        Ok(s.signum())
    } else {
        Err(Error::Domain { slope: s, cell })
    }
}

/// Coefficients of `Ψₙ` and of its Legendre-side composition `Υₙ∘ψₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizedKernel {
    pub n: u32,
    pub a_n: f64,
    pub b_n: f64,
    pub c_n: f64,
    pub atil_n: f64,
    pub btil_n: f64,
    pub ctil_n: f64,
    /// `1 - 1/n²`, the value of `t²` where the two branches meet.
    pub junction: f64,
}

/// Builds `Ψₙ` for `n >= 2`.
pub fn make_regularized(n: u32) -> Result<RegularizedKernel> {
    if n < 2 {
        return Err(Error::Parameter(format!("regularization index must be >= 2, got {n}")));
    }
    let nf = f64::from(n);
    let junction = 1.0 - 1.0 / (nf * nf);
    let a_n = 1.0 - 1.0 / nf;
    let b_n = nf / 2.0;
    let c_n = nf * nf * nf / 8.0;
    Ok(RegularizedKernel {
        n,
        a_n,
        b_n,
        c_n,
        atil_n: nf - 1.0,
        btil_n: b_n - 2.0 * c_n * junction,
        ctil_n: 3.0 * c_n,
        junction,
    })
}

impl RegularizedKernel {
    fn outer(&self, x: f64) -> bool {
        x > self.junction
    }

    /// `Ψₙ(t) = hₙ(t²)`.
    pub fn psi(&self, t: f64) -> f64 {
        let x = t * t;
        if self.outer(x) {
            let y = x - self.junction;
            self.a_n + self.b_n * y + self.c_n * y * y
        } else {
            1.0 - ((1.0 - t) * (1.0 + t)).sqrt()
        }
    }

    /// `ψₙ(t) = Ψₙ'(t) = 2t hₙ'(t²)`.
    pub fn psi_deriv(&self, t: f64) -> f64 {
        let x = t * t;
        if self.outer(x) {
            let y = x - self.junction;
            2.0 * t * (self.b_n + 2.0 * self.c_n * y)
        } else {
            t / ((1.0 - t) * (1.0 + t)).sqrt()
        }
    }

    /// `Ψₙ''(t) = 2hₙ'(t²) + 4t² hₙ''(t²)`.
    pub fn psi_second(&self, t: f64) -> f64 {
        let x = t * t;
        if self.outer(x) {
            let y = x - self.junction;
            2.0 * (self.b_n + 2.0 * self.c_n * y) + 8.0 * x * self.c_n
        } else {
            let r = (1.0 - t) * (1.0 + t);
            1.0 / (r * r.sqrt())
        }
    }

    /// `Υₙ(ψₙ(t)) = t ψₙ(t) - Ψₙ(t)`, the conserved-energy kinetic term.
    pub fn upsilon_psi(&self, t: f64) -> f64 {
        let x = t * t;
        if self.outer(x) {
            self.atil_n + self.btil_n * (x - self.junction) + self.ctil_n * (x * x - self.junction * self.junction)
        } else {
            1.0 / ((1.0 - t) * (1.0 + t)).sqrt() - 1.0
        }
    }
}

/// Kinetic density used by an action: the singular relativistic `g` or a
/// globally defined regularization `Ψₙ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Relativistic,
    Regularized(RegularizedKernel),
}

impl Kernel {
    pub fn density(&self, s: f64) -> Result<f64> {
        match self {
            Kernel::Relativistic => g(s),
            Kernel::Regularized(k) => Ok(k.psi(s)),
        }
    }

    pub fn flux(&self, s: f64) -> Result<f64> {
        match self {
            Kernel::Relativistic => g_prime(s),
            Kernel::Regularized(k) => Ok(k.psi_deriv(s)),
        }
    }

    pub fn curvature(&self, s: f64) -> Result<f64> {
        match self {
            Kernel::Relativistic => g_second(s),
            Kernel::Regularized(k) => Ok(k.psi_second(s)),
        }
    }
}
