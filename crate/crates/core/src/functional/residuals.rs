use serde::{Deserialize, Serialize};

use super::Profile;
use crate::error::{Error, Result};
use crate::kernel::{g_prime, RegularizedKernel};
use crate::potentials::{max_w, Potential};
use crate::weights::Weight;

/// A residual sampled at the interior nodes of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub max_abs: f64,
}

impl Residuals {
    fn new(t: Vec<f64>, r: Vec<f64>) -> Self {
        let max_abs = r.iter().map(|x| x.abs()).fold(0.0, f64::max);
        Residuals { t, r, max_abs }
    }
}

/// `1 − 1/√(1 − s̄ᵢ²) + W(uᵢ)` with `s̄ᵢ` the centered slope.
pub fn conservation_residual(p: &Profile, w: &Potential) -> Result<Residuals> {
    let sbar = p.centered_slopes();
    let mut r = Vec::with_capacity(sbar.len());
    for (k, &s) in sbar.iter().enumerate() {
        if !(s.abs() < 1.0) {
            return Err(Error::Singularity {
                slope: s,
                cell: Some(k + 1),
            });
        }
        let gamma = 1.0 / ((1.0 - s) * (1.0 + s)).sqrt();
        r.push(1.0 - gamma + w.w(p.values()[k + 1]));
    }
    Ok(Residuals::new(p.nodes()[1..p.cells()].to_vec(), r))
}

/// `Υₙ(ψₙ(s̄ᵢ)) − W(uᵢ)`, the first integral of the regularized problem.
pub fn regularized_conservation_residual(p: &Profile, w: &Potential, k: &RegularizedKernel) -> Residuals {
    let r = p
        .centered_slopes()
        .iter()
        .enumerate()
        .map(|(j, &s)| k.upsilon_psi(s) - w.w(p.values()[j + 1]))
        .collect();
    Residuals::new(p.nodes()[1..p.cells()].to_vec(), r)
}

/// `(p_{i+½} − p_{i−½})/Δtᵢ − a(tᵢ)W′(uᵢ)` with `p = g′(s)` on each cell and
/// `Δtᵢ` the mean of the adjacent widths.
pub fn el_residual(p: &Profile, w: &Potential, a: &Weight) -> Result<Residuals> {
    let n = p.cells();
    let mut flux = Vec::with_capacity(n);
    for i in 0..n {
        let s = p.slope(i);
        flux.push(g_prime(s).map_err(|_| Error::Singularity {
            slope: s,
            cell: Some(i),
        })?);
    }
    let (t, u) = (p.nodes(), p.values());
    let r = (1..n)
        .map(|i| {
            let dt = 0.5 * (t[i + 1] - t[i - 1]);
            (flux[i] - flux[i - 1]) / dt - a.at(t[i]) * w.dw(u[i])
        })
        .collect();
    Ok(Residuals::new(t[1..n].to_vec(), r))
}

/// `ℓ′ = 1 − 1/(1 + max W)²`, the squared slope bound.
pub fn derivative_bound_squared(w: &Potential) -> f64 {
    let m = max_w(w);
    m * (2.0 + m) / ((1.0 + m) * (1.0 + m))
}

/// `√(1 − 1/(1 + max W)²)`, written without cancellation.
pub fn derivative_bound(w: &Potential) -> f64 {
    let m = max_w(w).max(0.0);
    (m * (2.0 + m)).sqrt() / (1.0 + m)
}

/// `ε√(a₁β_ε)/√2`, the least action spent crossing from `1−ε` to `1−ε/2`.
pub fn crossing_lower_bound(eps: f64, a1: f64, beta: f64) -> Result<f64> {
    if !(eps > 0.0 && a1 > 0.0 && beta > 0.0) {
        return Err(Error::Parameter(format!(
            "crossing bound needs positive arguments (eps {eps}, a1 {a1}, beta {beta})"
        )));
    }
    Ok(eps * (a1 * beta).sqrt() / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::make_regularized;
    use crate::potentials::{allen_cahn, compact_truncate, exact_example};
    use crate::weights::{constant, monotone_even};

    fn tanh_profile(n: usize) -> Profile {
        Profile::uniform(-10.0, 10.0, n, |t| (t / std::f64::consts::SQRT_2).tanh()).unwrap()
    }

    #[test]
    fn constant_profile_residuals_vanish() {
        let p = Profile::uniform(0.0, 1.0, 11, |_| 1.0).unwrap();
        assert_eq!(conservation_residual(&p, &allen_cahn()).unwrap().max_abs, 0.0);
        let k = make_regularized(3).unwrap();
        assert_eq!(regularized_conservation_residual(&p, &allen_cahn(), &k).max_abs, 0.0);
    }

    #[test]
    fn conservation_on_exact_solution_is_second_order() {
        let w = exact_example();
        let r1 = conservation_residual(&tanh_profile(1001), &w).unwrap().max_abs;
        let r2 = conservation_residual(&tanh_profile(2001), &w).unwrap().max_abs;
        assert!(r2 <= 2e-4, "{r2}");
        let ratio = r1 / r2;
        assert!((3.5..4.5).contains(&ratio), "observed order ratio {ratio}");
    }

    #[test]
    fn el_on_exact_solution_is_second_order() {
        let w = exact_example();
        let a = constant(1.0).unwrap();
        let r1 = el_residual(&tanh_profile(1001), &w, &a).unwrap().max_abs;
        let r2 = el_residual(&tanh_profile(2001), &w, &a).unwrap().max_abs;
        assert!(r2 <= 5e-4, "{r2}");
        let ratio = r1 / r2;
        assert!((3.5..4.5).contains(&ratio), "observed order ratio {ratio}");
    }

    #[test]
    fn el_vanishes_on_the_plateau() {
        let w = compact_truncate(&allen_cahn());
        let a = monotone_even(1.0).unwrap();
        let p = Profile::uniform(0.0, 4.0, 41, |t| (t / 2.0).min(1.0)).unwrap();
        let r = el_residual(&p, &w, &a).unwrap();
        for (t, r) in r.t.iter().zip(&r.r) {
            if *t > 2.0 + 1e-9 {
                assert_eq!(*r, 0.0);
            }
        }
    }

    #[test]
    fn conservation_at_the_allen_cahn_center() {
        // u′ = 0.6 at u = 0: 1 − 1/0.8 + 0.25 = 0.
        let p = Profile::new(vec![-1.0, 0.0, 1.0], vec![-0.6, 0.0, 0.6]).unwrap();
        let r = conservation_residual(&p, &allen_cahn()).unwrap();
        assert!(r.r[0].abs() < 1e-15);
    }

    #[test]
    fn singular_slope_is_reported() {
        let p = Profile::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            conservation_residual(&p, &allen_cahn()),
            Err(Error::Singularity { .. })
        ));
        assert!(matches!(
            el_residual(&p, &allen_cahn(), &constant(1.0).unwrap()),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn derivative_bounds() {
        assert!((derivative_bound(&allen_cahn()) - 0.6).abs() < 1e-12);
        assert!((derivative_bound(&exact_example()) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((derivative_bound_squared(&allen_cahn()) - 0.36).abs() < 1e-12);
        let tiny = allen_cahn().scaled(1e-12);
        assert!(derivative_bound(&tiny) < 1e-5);
    }

    #[test]
    fn crossing_bound_examples() {
        let b = crossing_lower_bound(0.2, 1.0, 0.009025).unwrap();
        assert!((b - 0.2 * 0.095 / std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!((b - 0.013435).abs() < 1e-6);
        assert!(crossing_lower_bound(0.2, 1e-300, 0.009025).unwrap() < 1e-150);
        assert!(crossing_lower_bound(0.2, 0.0, 0.009025).is_err());
        assert!(crossing_lower_bound(-0.2, 1.0, 0.009025).is_err());
    }
}
