//! Surgeries on profiles: clamping, monotone rearrangement, stretching,
//! excision and odd extension.

use crate::error::{Error, Result};
use crate::functional::Profile;

/// Junction tolerance for excision and for `u(0) = 0` in [`oddify`].
pub const VALUE_TOL: f64 = 1e-9;

/// Pointwise `max(-1, min(u, 1))`. A 1-Lipschitz map of the values, so
/// slopes can only shrink.
pub fn clamp(p: &Profile) -> Profile {
    let values = p.values().iter().map(|u| u.clamp(-1.0, 1.0)).collect();
    Profile::from_parts_unchecked(p.nodes().to_vec(), values, true)
}

/// Sorts the values on a uniform grid.
///
/// Each sorted gap is bridged by some single step of the original sequence,
/// so admissibility is preserved.
pub fn rearrange(p: &Profile) -> Result<Profile> {
    p.uniform_spacing()?;
    let mut v = p.values().to_vec();
    v.sort_by(f64::total_cmp);
    Ok(Profile::from_parts_unchecked(p.nodes().to_vec(), v, p.is_clamped()))
}

/// Number of equal neighbours in the sorted values. Non-zero means the sorted
/// arrangement is not the unique minimizer among permutations.
pub fn count_ties(p: &Profile) -> usize {
    let mut v = p.values().to_vec();
    v.sort_by(f64::total_cmp);
    v.windows(2).filter(|w| w[0] == w[1]).count()
}

fn check_band(p: &Profile, t0: f64, t1: f64, theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Parameter(format!("stretch needs theta in (0, 1), got {theta}")));
    }
    if !(t0 < t1) {
        return Err(Error::Parameter(format!("stretch needs t0 < t1, got [{t0}, {t1}]")));
    }
    if t0 < p.t_first() || t1 > p.t_last() {
        return Err(Error::Parameter(format!(
            "band [{t0}, {t1}] leaves the grid [{}, {}]",
            p.t_first(),
            p.t_last()
        )));
    }
    Ok(())
}

/// `u_θ` as an exact piecewise-linear graph: nodes in `(t0, t1]` are dilated
/// by `1/(1−θ)` about `t0` and nodes beyond `t1` are translated by
/// `θ(t1−t0)/(1−θ)`. Band ends that miss the grid are inserted as nodes.
pub fn stretch_graph(p: &Profile, t0: f64, t1: f64, theta: f64) -> Result<Profile> {
    check_band(p, t0, t1, theta)?;
    let slack = VALUE_TOL * p.width(0);
    let mut nodes: Vec<f64> = Vec::with_capacity(p.len() + 2);
    let mut values: Vec<f64> = Vec::with_capacity(p.len() + 2);
    fn push(nodes: &mut Vec<f64>, values: &mut Vec<f64>, slack: f64, t: f64, u: f64) {
        if nodes.last().is_none_or(|&l| t > l + slack) {
            nodes.push(t);
            values.push(u);
        }
    }
    for (&t, &u) in p.nodes().iter().zip(p.values()) {
        for edge in [t0, t1] {
            if t > edge + slack && nodes.last().is_some_and(|&l| l < edge - slack) {
                push(&mut nodes, &mut values, slack, edge, p.value_at(edge));
            }
        }
        push(&mut nodes, &mut values, slack, t, u);
    }
    let shift = theta * (t1 - t0) / (1.0 - theta);
    let mapped = nodes
        .iter()
        .map(|&t| {
            if t <= t0 + slack {
                t
            } else if t <= t1 + slack {
                t0 + (t - t0) / (1.0 - theta)
            } else {
                t + shift
            }
        })
        .collect();
    Ok(Profile::from_parts_unchecked(mapped, values, p.is_clamped()))
}

/// `u_θ` resampled on a uniform grid with the input spacing, starting at the
/// first node and covering the extended support. Nodes past the end of the
/// stretched support repeat the last value.
pub fn stretch(p: &Profile, t0: f64, t1: f64, theta: f64) -> Result<Profile> {
    let graph = stretch_graph(p, t0, t1, theta)?;
    let h = (p.t_last() - p.t_first()) / p.cells() as f64;
    let cells = (graph.t_last() - graph.t_first()) / h;
    let snapped = cells.round();
    let k = if (cells - snapped).abs() <= 1e-9 * snapped.max(1.0) {
        snapped
    } else {
        cells.ceil()
    } as usize;
    let start = p.t_first();
    let nodes: Vec<f64> = (0..=k).map(|i| start + h * i as f64).collect();
    let values = nodes.iter().map(|&t| graph.value_at(t)).collect();
    Ok(Profile::from_parts_unchecked(nodes, values, p.is_clamped()))
}

fn node_index(p: &Profile, t: f64) -> Result<usize> {
    let slack = VALUE_TOL * p.width(0);
    let j = p.nodes().partition_point(|&x| x < t - slack);
    if j < p.len() && (p.nodes()[j] - t).abs() <= slack {
        Ok(j)
    } else {
        Err(Error::Parameter(format!("t = {t} is not a grid node")))
    }
}

/// Removes `(t1, t2]` and pulls the tail left by `t2 − t1`. Both times must
/// be grid nodes carrying the same value.
pub fn excise(p: &Profile, t1: f64, t2: f64) -> Result<Profile> {
    if t1 == t2 {
        return Ok(p.clone());
    }
    if !(t1 < t2) {
        return Err(Error::Parameter(format!("excise needs t1 <= t2, got [{t1}, {t2}]")));
    }
    let (i1, i2) = (node_index(p, t1)?, node_index(p, t2)?);
    let (u1, u2) = (p.values()[i1], p.values()[i2]);
    if (u1 - u2).abs() > VALUE_TOL {
        return Err(Error::Surgery(format!(
            "u({t1}) = {u1} and u({t2}) = {u2} differ by more than {VALUE_TOL:e}"
        )));
    }
    let gap = p.nodes()[i2] - p.nodes()[i1];
    let mut nodes = p.nodes()[..=i1].to_vec();
    let mut values = p.values()[..=i1].to_vec();
    nodes.extend(p.nodes()[i2 + 1..].iter().map(|t| t - gap));
    values.extend_from_slice(&p.values()[i2 + 1..]);
    let out = Profile::new(nodes, values)?;
    if p.is_clamped() {
        out.into_clamped()
    } else {
        Ok(out)
    }
}

/// Odd extension of a profile on `[0, L]` to `[−L, L]`.
pub fn oddify(p: &Profile) -> Result<Profile> {
    let t0 = p.t_first();
    if t0.abs() > 1e-12 * p.t_last().abs().max(1.0) {
        return Err(Error::Parameter(format!(
            "odd extension needs the grid to start at 0, got {t0}"
        )));
    }
    let u0 = p.values()[0];
    if u0.abs() > VALUE_TOL {
        return Err(Error::Parameter(format!("odd extension needs u(0) = 0, got {u0}")));
    }
    let n = p.len();
    let mut nodes = Vec::with_capacity(2 * n - 1);
    let mut values = Vec::with_capacity(2 * n - 1);
    for k in (1..n).rev() {
        nodes.push(-p.nodes()[k]);
        values.push(-p.values()[k]);
    }
    nodes.push(0.0);
    values.push(0.0);
    nodes.extend_from_slice(&p.nodes()[1..]);
    values.extend_from_slice(&p.values()[1..]);
    let out = Profile::new(nodes, values)?;
    if p.is_clamped() {
        out.into_clamped()
    } else {
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::action;
    use crate::potentials::{allen_cahn, exact_example};
    use crate::weights::{constant, monotone_even};
    use std::f64::consts::SQRT_2;

    fn next_permutation(v: &mut [f64]) {
        let n = v.len();
        let Some(i) = (0..n - 1).rev().find(|&i| v[i] < v[i + 1]) else {
            v.reverse();
            return;
        };
        let j = (i + 1..n).rev().find(|&j| v[j] > v[i]).unwrap();
        v.swap(i, j);
        v[i + 1..].reverse();
    }

    fn unit_cells(v: &[f64]) -> Profile {
        Profile::new((0..v.len()).map(|i| i as f64).collect(), v.to_vec()).unwrap()
    }

    #[test]
    fn clamp_examples() {
        let inside = unit_cells(&[-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(clamp(&inside).values(), inside.values());
        let over = unit_cells(&[0.0, 0.6, 1.2, 0.6, 1.0]);
        let c = clamp(&over);
        assert_eq!(c.values(), &[0.0, 0.6, 1.0, 0.6, 1.0]);
        let one = constant(1.0).unwrap();
        let ka = action(&over, &allen_cahn(), &one).unwrap().kinetic;
        let kc = action(&c, &allen_cahn(), &one).unwrap().kinetic;
        assert!(kc < ka);
        assert_eq!(clamp(&c), c);
    }

    #[test]
    fn rearrange_examples() {
        let sorted = unit_cells(&[-1.0, -0.5, 0.0, 1.0]);
        assert_eq!(rearrange(&sorted).unwrap(), sorted);
        // Cells of width 2 keep every permutation's slopes below 1.
        let v = [-0.8, 0.0, -0.4, 0.8];
        let p = Profile::new(vec![0.0, 2.0, 4.0, 6.0], v.to_vec()).unwrap();
        let r = rearrange(&p).unwrap();
        assert_eq!(r.values(), &[-0.8, -0.4, 0.0, 0.8]);
        let one = constant(1.0).unwrap();
        let w = allen_cahn();
        let kr = action(&r, &w, &one).unwrap().kinetic;
        assert!(kr <= action(&p, &w, &one).unwrap().kinetic);
        let kin = |u: &[f64]| -> f64 {
            u.windows(2)
                .map(|c| 2.0 * crate::kernel::g((c[1] - c[0]) / 2.0).unwrap())
                .sum()
        };
        let mut perm = v;
        let mut best = f64::INFINITY;
        for _ in 0..24 {
            best = best.min(kin(&perm));
            next_permutation(&mut perm);
        }
        assert!((kin(r.values()) - best).abs() < 1e-15);
        let bad = Profile::new(vec![0.0, 1.0, 3.0], vec![0.0, 0.5, 0.0]).unwrap();
        assert!(matches!(rearrange(&bad), Err(Error::UnsupportedGrid { .. })));
        assert_eq!(count_ties(&unit_cells(&[0.0, 0.5, 0.0])), 1);
    }

    #[test]
    fn stretch_identity_limit() {
        let p = Profile::uniform(-10.0, 10.0, 2001, |t| (t / SQRT_2).tanh()).unwrap();
        let q = stretch(&p, -1.0, 2.0, 1e-8).unwrap();
        assert!(p.sup_distance(|t| q.value_at(t)) <= 1e-6);
    }

    #[test]
    fn stretch_shape() {
        let p = Profile::uniform(0.0, 4.0, 5, |t| t / 4.0).unwrap();
        let g = stretch_graph(&p, 1.0, 2.0, 0.5).unwrap();
        assert_eq!(g.nodes(), &[0.0, 1.0, 3.0, 4.0, 5.0]);
        assert_eq!(g.values(), p.values());
        let q = stretch(&p, 1.0, 2.0, 0.5).unwrap();
        assert_eq!(q.len(), 6);
        assert!(q.uniform_spacing().is_ok());
        assert!(q.max_abs_slope() <= p.max_abs_slope() + 1e-15);
        assert!(stretch(&p, 2.0, 1.0, 0.5).is_err());
        assert!(stretch(&p, 1.0, 2.0, 1.0).is_err());
        assert!(stretch(&p, 1.0, 2.0, 0.0).is_err());
        assert!(stretch(&p, -1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn stretch_inserts_band_ends() {
        let p = Profile::uniform(0.0, 4.0, 5, |t| t / 4.0).unwrap();
        let g = stretch_graph(&p, 0.5, 2.5, 0.5).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.5, 1.5, 3.5, 4.5, 5.0, 6.0]);
        assert_eq!(g.values(), &[0.0, 0.125, 0.25, 0.5, 0.625, 0.75, 1.0]);
    }

    #[test]
    fn excise_constant_segment() {
        let w = allen_cahn();
        let one = constant(1.0).unwrap();
        let p = unit_cells(&[0.0, 0.5, 0.5, 0.5, 0.5, 1.0]);
        let q = excise(&p, 1.0, 3.0).unwrap();
        assert_eq!(q.values(), &[0.0, 0.5, 0.5, 1.0]);
        assert_eq!(q.nodes(), &[0.0, 1.0, 2.0, 3.0]);
        let dp = action(&p, &w, &one).unwrap().total - action(&q, &w, &one).unwrap().total;
        assert!((dp - 2.0 * w.w(0.5)).abs() < 1e-15);
        assert_eq!(excise(&p, 2.0, 2.0).unwrap(), p);
        assert!(matches!(excise(&p, 0.0, 2.0), Err(Error::Surgery(_))));
        assert!(matches!(excise(&p, 0.5, 2.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn excise_a_bump() {
        let w = allen_cahn();
        let a = monotone_even(1.0).unwrap();
        let v = [0.0, 0.3, 0.6, 0.8, 0.7, 0.6, 0.8, 0.95, 1.0];
        let p = Profile::new((0..9).map(|i| 0.5 * i as f64).collect(), v.to_vec()).unwrap();
        let q = excise(&p, 1.0, 2.5).unwrap();
        assert!(action(&q, &w, &a).unwrap().total < action(&p, &w, &a).unwrap().total);
    }

    #[test]
    fn oddify_examples() {
        let half = Profile::uniform(0.0, 10.0, 1001, |t| (t / SQRT_2).tanh()).unwrap();
        let full = oddify(&half).unwrap();
        assert_eq!(full.len(), 2001);
        assert!(full.sup_distance(|t| (t / SQRT_2).tanh()) < 1e-15);
        let w = exact_example();
        let a = monotone_even(0.5).unwrap();
        let af = action(&full, &w, &a).unwrap().total;
        let ah = action(&half, &w, &a).unwrap().total;
        assert!((af - 2.0 * ah).abs() <= 1e-13 * af.abs());
        let back = oddify(&full.restrict(0.0, 10.0).unwrap()).unwrap();
        assert_eq!(back, full);
        let shifted = Profile::uniform(0.0, 1.0, 3, |t| 0.1 + t / 2.0).unwrap();
        assert!(oddify(&shifted).is_err());
        assert!(oddify(&full).is_err());
    }
}
