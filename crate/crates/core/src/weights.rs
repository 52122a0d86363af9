//! Time-dependent weights `a(t)` multiplying the potential.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::potentials::ScalarFn;

/// Hypotheses a weight is advertised to satisfy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightFlags {
    /// `0 < a₁ ≤ a(t) ≤ a₂`.
    pub a1: bool,
    /// Locally bounded.
    pub a1_prime: bool,
    /// Nondecreasing on `[0, ∞)`.
    pub a2: bool,
    /// Even.
    pub a3: bool,
    /// Positive for `t > T_pos`.
    pub a4: bool,
}

#[derive(Clone)]
pub struct Weight {
    pub name: String,
    eval: ScalarFn,
    pub bounds: Option<(f64, f64)>,
    pub period: Option<f64>,
    pub positivity_threshold: Option<f64>,
    pub flags: WeightFlags,
    /// Set when `a` is a known constant; enables the autonomous checks.
    pub constant: Option<f64>,
    pub dominating: Option<Box<Weight>>,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight")
            .field("name", &self.name)
            .field("bounds", &self.bounds)
            .field("period", &self.period)
            .field("positivity_threshold", &self.positivity_threshold)
            .field("flags", &self.flags)
            .field("constant", &self.constant)
            .field("dominating", &self.dominating)
            .finish()
    }
}

impl Weight {
    /// A weight with no advertised hypotheses.
    pub fn new(name: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Weight {
            name: name.into(),
            eval: Arc::new(eval),
            bounds: None,
            period: None,
            positivity_threshold: None,
            flags: WeightFlags {
                a1_prime: true,
                ..WeightFlags::default()
            },
            constant: None,
            dominating: None,
        }
    }

    pub fn from_expr(name: impl Into<String>, source: &str) -> Result<Self> {
        let e = Expr::parse(source, "t")?;
        Ok(Weight::new(name, move |t| e.eval(t)))
    }

    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn with_flags(mut self, flags: WeightFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Self {
        self.bounds = Some((lo, hi));
        self
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }

    pub fn with_positivity_threshold(mut self, t: f64) -> Self {
        self.positivity_threshold = Some(t);
        self
    }

    pub fn with_dominating(mut self, b: Weight) -> Self {
        self.dominating = Some(Box::new(b));
        self
    }

    /// `t ↦ a(t + shift)`.
    pub fn translated(&self, shift: f64) -> Weight {
        let e = Arc::clone(&self.eval);
        let mut w = self.clone();
        w.name = format!("{}(t+{shift})", self.name);
        w.eval = Arc::new(move |t| e(t + shift));
        w
    }

    /// Checks every advertised flag on `samples` points of `[-span, span]`.
    pub fn validate(&self, samples: usize, span: f64) -> Result<()> {
        let samples = samples.max(16);
        let ts: Vec<f64> = (0..=samples)
            .map(|i| -span + 2.0 * span * i as f64 / samples as f64)
            .collect();
        let fail = |hypothesis: &'static str, detail: String| Err(Error::Hypothesis { hypothesis, detail });
        for &t in &ts {
            if !self.at(t).is_finite() {
                return fail("a1'", format!("a({t}) is not finite"));
            }
        }
        if self.flags.a1 {
            let Some((lo, hi)) = self.bounds else {
                return fail("a1", "no bounds recorded".into());
            };
            if !(lo > 0.0) {
                return fail("a1", format!("lower bound {lo} is not positive"));
            }
            for &t in &ts {
                let v = self.at(t);
                if v < lo - 1e-12 || v > hi + 1e-12 {
                    return fail("a1", format!("a({t}) = {v} outside [{lo}, {hi}]"));
                }
            }
        }
        if let Some(p) = self.period {
            for &t in &ts {
                let (x, y) = (self.at(t), self.at(t + p));
                if (x - y).abs() > 1e-12 * (1.0 + x.abs()) {
                    return fail("periodic", format!("a({t}) = {x} but a({t}+{p}) = {y}"));
                }
            }
        }
        if self.flags.a2 {
            let mut prev = self.at(0.0);
            for &t in ts.iter().filter(|&&t| t > 0.0) {
                let v = self.at(t);
                if v < prev - 1e-12 * (1.0 + prev.abs()) {
                    return fail("a2", format!("a decreases to {v} at t = {t}"));
                }
                prev = v;
            }
        }
        if self.flags.a3 {
            for &t in &ts {
                let (x, y) = (self.at(t), self.at(-t));
                if (x - y).abs() > 1e-12 * (1.0 + x.abs()) {
                    return fail("a3", format!("a({t}) = {x} != a({}) = {y}", -t));
                }
            }
        }
        if self.flags.a4 {
            let Some(tp) = self.positivity_threshold else {
                return fail("a4", "no positivity threshold recorded".into());
            };
            for &t in ts.iter().filter(|&&t| t > tp) {
                if !(self.at(t) > 0.0) {
                    return fail("a4", format!("a({t}) = {} is not positive past T = {tp}", self.at(t)));
                }
            }
        }
        Ok(())
    }
}

/// `a ≡ c`.
pub fn constant(c: f64) -> Result<Weight> {
    if !c.is_finite() {
        return Err(Error::Parameter(format!("constant weight must be finite, got {c}")));
    }
    let positive = c > 0.0;
    let mut w = Weight::new(format!("constant({c})"), move |_| c).with_flags(WeightFlags {
        a1: positive,
        a1_prime: true,
        a2: true,
        a3: true,
        a4: positive,
    });
    w.bounds = Some((c, c));
    w.constant = Some(c);
    if positive {
        w.positivity_threshold = Some(0.0);
    }
    Ok(w)
}

/// `a(t) = mean + amp·sin(2πt/period)`, satisfying (a₁) when `|amp| < mean`.
pub fn periodic_sin(mean: f64, amp: f64, period: f64) -> Result<Weight> {
    if !(period > 0.0) {
        return Err(Error::Parameter(format!("period must be positive, got {period}")));
    }
    if !(amp.abs() < mean) {
        return Err(Error::Parameter(format!(
            "periodic weight needs |amp| < mean for a positive lower bound (mean {mean}, amp {amp})"
        )));
    }
    let omega = 2.0 * PI / period;
    let mut w = Weight::new(format!("periodic_sin({mean},{amp},{period})"), move |t| {
        mean + amp * (omega * t).sin()
    })
    .with_flags(WeightFlags {
        a1: true,
        a1_prime: true,
        a2: amp == 0.0,
        a3: amp == 0.0,
        a4: true,
    })
    .with_bounds(mean - amp.abs(), mean + amp.abs())
    .with_period(period)
    .with_positivity_threshold(0.0);
    if amp == 0.0 {
        w.constant = Some(mean);
    }
    Ok(w)
}

/// `a(t) = limit − bump·e^{−|t|}`, increasing to its supremum `limit`; it is
/// dominated in the sense of (b₁) by the constant `limit`.
pub fn asymptotically_constant(limit: f64, bump: f64) -> Result<Weight> {
    if !(bump >= 0.0 && bump < limit) {
        return Err(Error::Parameter(format!(
            "asymptotically constant weight needs 0 <= bump < limit (limit {limit}, bump {bump})"
        )));
    }
    Ok(
        Weight::new(format!("asymptotically_constant({limit},{bump})"), move |t| {
            limit - bump * (-t.abs()).exp()
        })
        .with_flags(WeightFlags {
            a1: true,
            a1_prime: true,
            a2: true,
            a3: true,
            a4: true,
        })
        .with_bounds(limit - bump, limit)
        .with_positivity_threshold(0.0)
        .with_dominating(constant(limit)?),
    )
}

/// `a(t) = rate·t²`: unbounded, even, nondecreasing on `t ≥ 0`.
pub fn monotone_even(rate: f64) -> Result<Weight> {
    monotone_even_shifted(rate, 0.0)
}

/// `a(t) = rate·(t² − threshold²)`: negative on `|t| < threshold`, positive beyond.
pub fn monotone_even_shifted(rate: f64, threshold: f64) -> Result<Weight> {
    if !(rate > 0.0) || !(threshold >= 0.0) {
        return Err(Error::Parameter(format!(
            "monotone even weight needs rate > 0 and threshold >= 0 (rate {rate}, threshold {threshold})"
        )));
    }
    let t2 = threshold * threshold;
    Ok(Weight::new(format!("monotone_even({rate},{threshold})"), move |t| {
        rate * (t * t - t2)
    })
    .with_flags(WeightFlags {
        a1: false,
        a1_prime: true,
        a2: true,
        a3: true,
        a4: true,
    })
    .with_positivity_threshold(threshold))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum B1ViolationKind {
    /// `a(t) > b(t)`.
    NotDominated,
    /// `|b(t) − a(t)| > tail_tol` on the tail.
    TailGap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct B1Violation {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub kind: B1ViolationKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct B1Report {
    pub pass: bool,
    /// Largest `|b − a|` seen on `|t| ≥ horizon/2`.
    pub max_tail_gap: f64,
    /// Gap at `t = ±horizon`.
    pub gap_at_horizon: f64,
    pub violations: Vec<B1Violation>,
}

const B1_SAMPLES: usize = 10_000;

/// Samples `a ≤ b` on `[-horizon, horizon]` and `|b − a| ≤ tail_tol` for
/// `|t| ≥ horizon/2`. Violations are listed nearest the origin first, at
/// most 32 per kind.
pub fn check_b1(a: &Weight, b: &Weight, tail_tol: f64, horizon: f64) -> B1Report {
    let mut violations = Vec::new();
    let (mut dominated, mut tail) = (0usize, 0usize);
    let mut max_tail_gap: f64 = 0.0;
    // Visit samples outward from the origin so listed violations start there.
    let mut ts: Vec<f64> = (0..=B1_SAMPLES)
        .map(|i| -horizon + 2.0 * horizon * i as f64 / B1_SAMPLES as f64)
        .collect();
    ts.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    for t in ts {
        let (va, vb) = (a.at(t), b.at(t));
        if !(va <= vb + 1e-12 * (1.0 + vb.abs())) {
            dominated += 1;
            if dominated <= 32 {
                violations.push(B1Violation {
                    t,
                    a: va,
                    b: vb,
                    kind: B1ViolationKind::NotDominated,
                });
            }
        }
        if t.abs() >= horizon / 2.0 {
            let gap = (vb - va).abs();
            max_tail_gap = max_tail_gap.max(gap);
            if !(gap <= tail_tol) {
                tail += 1;
                if tail <= 32 {
                    violations.push(B1Violation {
                        t,
                        a: va,
                        b: vb,
                        kind: B1ViolationKind::TailGap,
                    });
                }
            }
        }
    }
    let gap_at_horizon = (b.at(horizon) - a.at(horizon))
        .abs()
        .max((b.at(-horizon) - a.at(-horizon)).abs());
    B1Report {
        pass: dominated == 0 && tail == 0,
        max_tail_gap,
        gap_at_horizon,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_flags() {
        let w = constant(1.0).unwrap();
        assert!(w.flags.a1);
        assert_eq!(w.bounds, Some((1.0, 1.0)));
        assert_eq!(w.constant, Some(1.0));
        w.validate(10_000, 100.0).unwrap();
    }

    #[test]
    fn periodic_bounds() {
        let w = periodic_sin(2.0, 1.0, 5.0).unwrap();
        assert_eq!(w.bounds, Some((1.0, 3.0)));
        assert_eq!(w.period, Some(5.0));
        w.validate(10_000, 100.0).unwrap();
        for i in 0..100 {
            let t = -50.0 + f64::from(i) * 1.01;
            assert!((w.at(t) - w.at(t + 5.0)).abs() < 1e-12);
        }
        assert!(periodic_sin(1.0, 1.0, 5.0).is_err());
        assert!(periodic_sin(2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn monotone_even_flags() {
        let w = monotone_even(1.0).unwrap();
        assert!(!w.flags.a1);
        assert!(w.flags.a1_prime && w.flags.a2 && w.flags.a3 && w.flags.a4);
        w.validate(10_000, 100.0).unwrap();
        assert_eq!(w.at(3.0), 9.0);
        // Turning on (a1) must fail: the weight is unbounded.
        let forced = w
            .clone()
            .with_flags(WeightFlags { a1: true, ..w.flags })
            .with_bounds(0.0, 1.0);
        assert!(forced.validate(1000, 100.0).is_err());
        // Any T_pos > 0 works for (a4).
        for tp in [0.1, 1.0, 7.0] {
            w.clone().with_positivity_threshold(tp).validate(1000, 100.0).unwrap();
        }
        let s = monotone_even_shifted(1.0, 1.0).unwrap();
        assert!(s.at(0.5) < 0.0 && s.at(1.5) > 0.0);
        s.validate(10_000, 100.0).unwrap();
    }

    #[test]
    fn every_constructor_validates() {
        let ws = [
            constant(1.0).unwrap(),
            constant(2.5).unwrap(),
            periodic_sin(2.0, 1.0, 5.0).unwrap(),
            asymptotically_constant(2.0, 1.0).unwrap(),
            monotone_even(0.5).unwrap(),
            monotone_even_shifted(1.0, 1.0).unwrap(),
        ];
        for w in ws {
            w.validate(10_000, 100.0).unwrap_or_else(|e| panic!("{}: {e}", w.name));
        }
    }

    #[test]
    fn validation_catches_false_flags() {
        let w = periodic_sin(2.0, 1.0, 5.0).unwrap();
        assert!(w
            .clone()
            .with_flags(WeightFlags { a3: true, ..w.flags })
            .validate(1000, 10.0)
            .is_err());
        assert!(w
            .clone()
            .with_flags(WeightFlags { a2: true, ..w.flags })
            .validate(1000, 10.0)
            .is_err());
        assert!(w.clone().with_period(4.0).validate(1000, 10.0).is_err());
    }

    #[test]
    fn b1_examples() {
        let one = constant(1.0).unwrap();
        assert!(check_b1(&one, &one, 1e-9, 50.0).pass);

        let a = asymptotically_constant(2.0, 1.0).unwrap();
        let b = constant(2.0).unwrap();
        let r = check_b1(&a, &b, 1e-3, 40.0);
        assert!(r.pass, "{r:?}");
        // e^{-40} is below half an ulp of 2, so the gap rounds to zero.
        assert_eq!(r.gap_at_horizon, 0.0);
        assert!(r.max_tail_gap <= (-20f64).exp() + 1e-15);
        let r = check_b1(&a, &b, 1e-2, 10.0);
        assert!(r.pass);
        assert!((r.gap_at_horizon - (-10f64).exp()).abs() < 1e-15);

        let two = constant(2.0).unwrap();
        let r = check_b1(&two, &one, 1e-3, 10.0);
        assert!(!r.pass);
        assert!(r
            .violations
            .iter()
            .any(|v| v.kind == B1ViolationKind::NotDominated && v.t.abs() < 1e-12));
    }

    #[test]
    fn dominating_weight_is_recorded() {
        let a = asymptotically_constant(2.0, 1.0).unwrap();
        let b = a.dominating.as_deref().unwrap();
        assert_eq!(b.constant, Some(2.0));
        assert!(check_b1(&a, b, 1e-6, 60.0).pass);
    }

    #[test]
    fn translation_by_period() {
        let w = periodic_sin(2.0, 1.0, 5.0).unwrap();
        let tr = w.translated(5.0);
        for i in 0..1000 {
            let t = -100.0 + 0.2 * f64::from(i);
            assert!((w.at(t) - tr.at(t)).abs() < 1e-12);
        }
    }
}
