use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::SLOPE_EPS;

/// Relative tolerance on cell widths for a grid to count as uniform.
const UNIFORM_TOL: f64 = 1e-9;

/// A continuous piecewise-linear candidate `u` sampled at strictly increasing
/// nodes, with every cell slope in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    nodes: Vec<f64>,
    values: Vec<f64>,
    clamped: bool,
}

impl Profile {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let p = Profile {
            nodes,
            values,
            clamped: false,
        };
        p.check()?;
        Ok(p)
    }

    /// `n` equally spaced nodes on `[t0, t1]` with values `f(t)`.
    pub fn uniform(t0: f64, t1: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || !(t1 > t0) {
            return Err(Error::Profile(format!(
                "uniform grid needs n >= 2 and t0 < t1 (n = {n}, [{t0}, {t1}])"
            )));
        }
        let nodes = uniform_nodes(t0, t1, n);
        let values = nodes.iter().map(|&t| f(t)).collect();
        Profile::new(nodes, values)
    }

    /// Marks the profile as lying in `[-1, 1]`; fails if it does not.
    pub fn into_clamped(mut self) -> Result<Self> {
        self.clamped = true;
        self.check()?;
        Ok(self)
    }

    pub(crate) fn from_parts_unchecked(nodes: Vec<f64>, values: Vec<f64>, clamped: bool) -> Self {
        Profile { nodes, values, clamped }
    }

    fn check(&self) -> Result<()> {
        let n = self.nodes.len();
        if n != self.values.len() {
            return Err(Error::Profile(format!("{n} nodes but {} values", self.values.len())));
        }
        if n < 2 {
            return Err(Error::Profile(format!("need at least 2 nodes, got {n}")));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Profile(format!(
                "value {} at node {i} is not finite",
                self.values[i]
            )));
        }
        for i in 0..n - 1 {
            let (a, b) = (self.nodes[i], self.nodes[i + 1]);
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::Profile(format!(
                    "nodes must be finite and strictly increasing (t[{i}] = {a}, t[{}] = {b})",
                    i + 1
                )));
            }
            let s = self.slope(i);
            if s.abs() > 1.0 + SLOPE_EPS {
                return Err(Error::Domain {
                    slope: s,
                    cell: Some(i),
                });
            }
        }
        if self.clamped {
            if let Some(i) = self.values.iter().position(|v| v.abs() > 1.0) {
                return Err(Error::Profile(format!(
                    "clamped profile has value {} at node {i}",
                    self.values[i]
                )));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_clamped(&self) -> bool {
        self.clamped
    }

    pub fn t_first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn t_last(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn width(&self, cell: usize) -> f64 {
        self.nodes[cell + 1] - self.nodes[cell]
    }

    pub fn slope(&self, cell: usize) -> f64 {
        (self.values[cell + 1] - self.values[cell]) / self.width(cell)
    }

    pub fn slopes(&self) -> Vec<f64> {
        (0..self.cells()).map(|i| self.slope(i)).collect()
    }

    pub fn max_abs_slope(&self) -> f64 {
        (0..self.cells()).map(|i| self.slope(i).abs()).fold(0.0, f64::max)
    }

    /// Average of the two adjacent cell slopes at each interior node.
    pub fn centered_slopes(&self) -> Vec<f64> {
        (1..self.cells())
            .map(|i| 0.5 * (self.slope(i - 1) + self.slope(i)))
            .collect()
    }

    /// The common cell width, or the first cell that breaks uniformity.
    pub fn uniform_spacing(&self) -> Result<f64> {
        let h = self.width(0);
        for i in 1..self.cells() {
            let w = self.width(i);
            if (w - h).abs() > UNIFORM_TOL * h {
                return Err(Error::UnsupportedGrid {
                    cell: i,
                    width: w,
                    expected: h,
                });
            }
        }
        Ok(h)
    }

    /// Linear interpolation, held constant beyond either end.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.nodes.len();
        if t <= self.nodes[0] {
            return self.values[0];
        }
        if t >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let j = self.nodes.partition_point(|&x| x <= t);
        let i = j - 1;
        let (t0, t1) = (self.nodes[i], self.nodes[j]);
        let w = (t - t0) / (t1 - t0);
        self.values[i] + w * (self.values[j] - self.values[i])
    }

    /// First `t` at which the interpolant reaches `level` from below.
    pub fn first_crossing(&self, level: f64) -> Option<f64> {
        if self.values[0] >= level {
            return (self.values[0] == level).then_some(self.nodes[0]);
        }
        for i in 0..self.cells() {
            let (a, b) = (self.values[i], self.values[i + 1]);
            if a < level && b >= level {
                let w = (level - a) / (b - a);
                return Some(self.nodes[i] + w * self.width(i));
            }
        }
        None
    }

    /// Where the profile first crosses zero upward; used to center translates.
    pub fn zero_crossing(&self) -> Option<f64> {
        self.first_crossing(0.0)
    }

    pub fn shifted(&self, dt: f64) -> Profile {
        Profile {
            nodes: self.nodes.iter().map(|t| t + dt).collect(),
            values: self.values.clone(),
            clamped: self.clamped,
        }
    }

    /// Same nodes, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Profile> {
        Profile::new(self.nodes.clone(), values)
    }

    /// Nodes in `[t0, t1]`, up to a relative slack of `1e-9` cell widths.
    pub fn restrict(&self, t0: f64, t1: f64) -> Result<Profile> {
        let slack = UNIFORM_TOL * self.width(0);
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| self.nodes[i] >= t0 - slack && self.nodes[i] <= t1 + slack)
            .collect();
        if idx.len() < 2 {
            return Err(Error::Profile(format!("fewer than two nodes inside [{t0}, {t1}]")));
        }
        Ok(Profile {
            nodes: idx.iter().map(|&i| self.nodes[i]).collect(),
            values: idx.iter().map(|&i| self.values[i]).collect(),
            clamped: self.clamped,
        })
    }

    /// `max_i |u_i - f(t_i)|`.
    pub fn sup_distance(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.values)
            .map(|(&t, &u)| (u - f(t)).abs())
            .fold(0.0, f64::max)
    }

    /// `max |u - v|` over the nodes of both profiles, each read by interpolation.
    pub fn sup_distance_to(&self, other: &Profile) -> f64 {
        let a = self.sup_distance(|t| other.value_at(t));
        let b = other.sup_distance(|t| self.value_at(t));
        a.max(b)
    }
}

/// `n` nodes `t0 + k(t1 - t0)/(n - 1)` with both ends exact.
pub(crate) fn uniform_nodes(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n)
        .map(|k| {
            if k == n - 1 {
                t1
            } else {
                t0 + (t1 - t0) * (k as f64 / m)
            }
        })
        .collect()
}
