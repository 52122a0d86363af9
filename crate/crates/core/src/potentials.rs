//! Double-well potentials with wells at `u = ±1`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which of the structural hypotheses a potential is advertised to satisfy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialFlags {
    /// Positive away from `±1` on its evaluation domain.
    pub w2: bool,
    /// Identically zero outside `(-1, 1)`.
    pub w2_prime: bool,
    /// Even: `W(s) = W(-s)`.
    pub w3: bool,
}

#[derive(Clone)]
pub struct Potential {
    pub name: String,
    eval: ScalarFn,
    deriv: ScalarFn,
    pub flags: PotentialFlags,
    /// Half-width of the interval where the formula is defined, if bounded.
    pub domain: Option<f64>,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("flags", &self.flags)
            .field("domain", &self.domain)
            .finish()
    }
}

impl Potential {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        flags: PotentialFlags,
    ) -> Self {
        Potential {
            name: name.into(),
            eval: Arc::new(eval),
            deriv: Arc::new(deriv),
            flags,
            domain: None,
        }
    }

    /// A potential given by an expression in `s`; its derivative is exact.
    pub fn from_expr(name: impl Into<String>, source: &str, flags: PotentialFlags) -> Result<Self> {
        let e = Arc::new(Expr::parse(source, "s")?);
        let e2 = Arc::clone(&e);
        Ok(Potential::new(
            name,
            move |s| e.eval(s),
            move |s| e2.eval_with_derivative(s).1,
            flags,
        ))
    }

    #[inline]
    pub fn w(&self, s: f64) -> f64 {
        (self.eval)(s)
    }

    #[inline]
    pub fn dw(&self, s: f64) -> f64 {
        (self.deriv)(s)
    }

    /// `c·W`, used to absorb a constant weight into the potential.
    pub fn scaled(&self, c: f64) -> Potential {
        if c == 1.0 {
            return self.clone();
        }
        let (e, d) = (Arc::clone(&self.eval), Arc::clone(&self.deriv));
        Potential {
            name: format!("{}*{c}", self.name),
            eval: Arc::new(move |s| c * e(s)),
            deriv: Arc::new(move |s| c * d(s)),
            flags: if c > 0.0 { self.flags } else { PotentialFlags::default() },
            domain: self.domain,
        }
    }

    /// Checks the advertised hypotheses and `W'` against central differences
    /// on `samples` points.
    pub fn validate(&self, samples: usize) -> Result<()> {
        let samples = samples.max(16);
        let edge = [self.w(-1.0), self.w(1.0)];
        if edge.iter().any(|v| v.abs() > 1e-14) {
            return Err(Error::Hypothesis {
                hypothesis: "W2",
                detail: format!("W(-1) = {}, W(1) = {}", edge[0], edge[1]),
            });
        }
        for i in 1..samples {
            let s = -1.0 + 2.0 * i as f64 / samples as f64;
            let v = self.w(s);
            if !(v > 0.0) {
                return Err(Error::Hypothesis {
                    hypothesis: "W2",
                    detail: format!("W({s}) = {v} is not positive"),
                });
            }
        }
        let outer = self.domain.map_or(3.0, |d| (0.9 * d).min(3.0));
        if self.flags.w2_prime || self.flags.w3 {
            for i in 0..=samples {
                let s = -outer + 2.0 * outer * i as f64 / samples as f64;
                if self.flags.w2_prime && s.abs() >= 1.0 && self.w(s) != 0.0 {
                    return Err(Error::Hypothesis {
                        hypothesis: "W2'",
                        detail: format!("W({s}) = {} outside (-1, 1)", self.w(s)),
                    });
                }
                if self.flags.w3 && (self.w(s) - self.w(-s)).abs() > 1e-14 * (1.0 + self.w(s).abs()) {
                    return Err(Error::Hypothesis {
                        hypothesis: "W3",
                        detail: format!("W({s}) != W({})", -s),
                    });
                }
            }
        }
        if self.flags.w2 && !self.flags.w2_prime {
            for i in 0..=samples {
                let s = -outer + 2.0 * outer * i as f64 / samples as f64;
                if (s.abs() - 1.0).abs() > 1e-9 && s.abs() < outer && !(self.w(s) > 0.0) {
                    return Err(Error::Hypothesis {
                        hypothesis: "W2",
                        detail: format!("W({s}) = {} is not positive", self.w(s)),
                    });
                }
            }
        }
        let h = 1e-6;
        let lim = outer - 2.0 * h;
        for i in 0..=samples {
            let s = -lim + 2.0 * lim * i as f64 / samples as f64;
            if self.flags.w2_prime && ((s.abs() - 1.0).abs() < 10.0 * h) {
                continue;
            }
            let fd = (self.w(s + h) - self.w(s - h)) / (2.0 * h);
            let an = self.dw(s);
            if (fd - an).abs() > 1e-6 * an.abs().max(1.0) {
                return Err(Error::Hypothesis {
                    hypothesis: "W1",
                    detail: format!("W'({s}) = {an} but finite differences give {fd}"),
                });
            }
        }
        Ok(())
    }
}

/// `W(s) = ¼(s² − 1)²`.
pub fn allen_cahn() -> Potential {
    Potential::new(
        "allen_cahn",
        |s| {
            let q = (s - 1.0) * (s + 1.0);
            0.25 * q * q
        },
        |s| s * (s - 1.0) * (s + 1.0),
        PotentialFlags {
            w2: true,
            w2_prime: false,
            w3: true,
        },
    )
}

/// `W(u) = −1 + sqrt(2 / (2 − (1 − u²)²))`, whose heteroclinic is `tanh(t/√2)`.
///
/// Evaluated in a cancellation-free form so values near the wells keep full
/// relative precision. Outside `|u| < sqrt(1 + √2)` the radicand is not
/// positive and the result is NaN.
pub fn exact_example() -> Potential {
    let mut p = Potential::new(
        "exact_example",
        |u| {
            let q = (1.0 - u) * (1.0 + u);
            let q2 = q * q;
            let den = 2.0 - q2;
            if den <= 0.0 {
                return f64::NAN;
            }
            let root = (2.0 / den).sqrt();
            (q2 / den) / (root + 1.0)
        },
        |u| {
            let q = (1.0 - u) * (1.0 + u);
            let den = 2.0 - q * q;
            if den <= 0.0 {
                return f64::NAN;
            }
            -2.0 * std::f64::consts::SQRT_2 * u * q / (den * den.sqrt())
        },
        PotentialFlags {
            w2: true,
            w2_prime: false,
            w3: true,
        },
    );
    p.domain = Some((1.0 + std::f64::consts::SQRT_2).sqrt());
    p
}

/// Sets `W` and `W'` to zero outside `(-1, 1)`.
pub fn compact_truncate(p: &Potential) -> Potential {
    let (e, d) = (Arc::clone(&p.eval), Arc::clone(&p.deriv));
    Potential {
        name: format!("compact({})", p.name),
        eval: Arc::new(move |s| if s.abs() < 1.0 { e(s) } else { 0.0 }),
        deriv: Arc::new(move |s| if s.abs() < 1.0 { d(s) } else { 0.0 }),
        flags: PotentialFlags {
            w2: p.flags.w2,
            w2_prime: true,
            w3: p.flags.w3,
        },
        domain: None,
    }
}

const SCAN_STEP: f64 = 1e-4;

/// Dense scan at resolution `1e-4` followed by golden-section refinement of
/// the best bracket. `sign = 1` maximizes, `sign = -1` minimizes.
fn scan_extremum(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, sign: f64) -> f64 {
    let n = (((hi - lo) / SCAN_STEP).ceil() as usize).max(2);
    let at = |i: usize| lo + (hi - lo) * i as f64 / n as f64;
    let mut best_i = 0;
    let mut best = sign * f(lo);
    for i in 1..=n {
        let v = sign * f(at(i));
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut a = at(best_i.saturating_sub(1));
    let mut b = at((best_i + 1).min(n));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (sign * f(x1), sign * f(x2));
    for _ in 0..60 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = sign * f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = sign * f(x2);
        }
    }
    sign * best.max(f1).max(f2)
}

/// `max_{[-1,1]} W`.
pub fn max_w(p: &Potential) -> f64 {
    scan_extremum(&|s| p.w(s), -1.0, 1.0, 1.0)
}

/// `β_ε = min { W(s) : 1−ε ≤ s ≤ 1−ε/2 or −1+ε/2 ≤ s ≤ −1+ε }`.
pub fn beta_eps(p: &Potential, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let f = |s: f64| p.w(s);
    let upper = scan_extremum(&f, 1.0 - eps, 1.0 - eps / 2.0, -1.0);
    let lower = scan_extremum(&f, -1.0 + eps / 2.0, -1.0 + eps, -1.0);
    Ok(upper.min(lower))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allen_cahn_values() {
        let w = allen_cahn();
        assert_eq!(w.w(1.0), 0.0);
        assert_eq!(w.w(-1.0), 0.0);
        assert_eq!(w.w(0.0), 0.25);
        assert_eq!(w.dw(0.0), 0.0);
        assert!(w.flags.w2 && w.flags.w3 && !w.flags.w2_prime);
    }

    #[test]
    fn exact_example_values() {
        let w = exact_example();
        assert_eq!(w.w(1.0), 0.0);
        assert_eq!(w.w(-1.0), 0.0);
        assert!((w.w(0.0) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let direct = -1.0 + (2.0f64 / (2.0 - 0.5625)).sqrt();
        assert!((w.w(0.5) - direct).abs() < 1e-15);
        assert!(w.w(1.6).is_nan());
        // Stable near the wells where the naive formula rounds to zero.
        let v = w.w(1.0 - 1e-9);
        let q = 2e-9 - 1e-18;
        assert!((v - q * q / 4.0).abs() < 1e-6 * q * q);
    }

    #[test]
    fn truncation() {
        let c = compact_truncate(&allen_cahn());
        assert_eq!(c.w(1.5), 0.0);
        assert_eq!(c.w(-1.0), 0.0);
        assert_eq!(c.w(0.0), 0.25);
        assert_eq!(c.dw(2.0), 0.0);
        assert!(c.flags.w2_prime && c.flags.w3);
    }

    #[test]
    fn builtins_validate() {
        for p in [
            allen_cahn(),
            exact_example(),
            compact_truncate(&allen_cahn()),
            compact_truncate(&exact_example()),
        ] {
            p.validate(10_000).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }

    #[test]
    fn validation_catches_bad_flags() {
        let mut p = allen_cahn();
        p.flags.w2_prime = true;
        assert!(matches!(
            p.validate(1000),
            Err(Error::Hypothesis { hypothesis: "W2'", .. })
        ));
        let skew = Potential::new(
            "skew",
            |s| 0.25 * (s * s - 1.0).powi(2) * (1.0 + 0.5 * s * s * s).max(0.1),
            |s| s,
            PotentialFlags {
                w2: true,
                w2_prime: false,
                w3: true,
            },
        );
        assert!(skew.validate(1000).is_err());
        let wrong_deriv = Potential::new(
            "bad",
            |s| 0.25 * (s * s - 1.0).powi(2),
            |s| s,
            PotentialFlags::default(),
        );
        assert!(matches!(
            wrong_deriv.validate(1000),
            Err(Error::Hypothesis { hypothesis: "W1", .. })
        ));
    }

    #[test]
    fn extrema() {
        assert!((max_w(&allen_cahn()) - 0.25).abs() < 1e-15);
        assert!((max_w(&exact_example()) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let b = beta_eps(&allen_cahn(), 0.2).unwrap();
        assert!((b - 0.25 * 0.19f64.powi(2)).abs() < 1e-15, "{b}");
        assert!(beta_eps(&allen_cahn(), 0.0).is_err());
        assert!(beta_eps(&allen_cahn(), 1.0).is_err());
    }

    #[test]
    fn beta_grows_away_from_the_wells() {
        for p in [allen_cahn(), exact_example()] {
            let mut prev = f64::INFINITY;
            for i in 1..20 {
                let eps = 0.05 * f64::from(i);
                let b = beta_eps(&p, eps).unwrap();
                assert!(b > 0.0);
                // Larger ε pushes both bands away from the wells, so β_ε grows.
                assert!(prev == f64::INFINITY || b >= prev * (1.0 - 1e-12), "eps={eps}");
                prev = b;
            }
        }
    }

    #[test]
    fn expression_potentials() {
        let p = Potential::from_expr(
            "custom",
            "0.25*(s^2-1)^2",
            PotentialFlags {
                w2: true,
                w2_prime: false,
                w3: true,
            },
        )
        .unwrap();
        p.validate(2000).unwrap();
        assert_eq!(p.w(0.0), 0.25);
        let s = p.scaled(2.0);
        assert_eq!(s.w(0.0), 0.5);
        assert_eq!(s.dw(0.5), 2.0 * p.dw(0.5));
    }
}
