use serde::{Deserialize, Serialize};

use super::{action, pairwise_sum, uniform_nodes, Profile};
use crate::error::{Error, Result};
use crate::kernel::snap_slope;
use crate::potentials::Potential;
use crate::weights;

/// Samples of `u(x, y)` on a tensor grid over `[-L, L] × [0, width]`,
/// stored row by row (`values[j * nx + i] = u(x_i, y_j)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripGrid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<f64>,
}

impl StripGrid {
    pub fn new(x: Vec<f64>, y: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || y.is_empty() || values.len() != x.len() * y.len() {
            return Err(Error::Profile(format!(
                "strip grid needs nx >= 2, ny >= 1 and nx*ny values (nx {}, ny {}, {} values)",
                x.len(),
                y.len(),
                values.len()
            )));
        }
        for v in [&x, &y] {
            if v.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Profile("strip nodes must be strictly increasing".into()));
            }
        }
        Ok(StripGrid { x, y, values })
    }

    /// `nx × ny` nodes on `[-half_length, half_length] × [0, width]`.
    pub fn from_fn(half_length: f64, width: f64, nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if nx < 2 || ny < 1 || !(half_length > 0.0) || !(width >= 0.0) {
            return Err(Error::Parameter(format!(
                "strip needs nx >= 2, ny >= 1, L > 0, width >= 0 (nx {nx}, ny {ny}, L {half_length}, width {width})"
            )));
        }
        let x = uniform_nodes(-half_length, half_length, nx);
        let y = if ny == 1 {
            vec![0.0]
        } else {
            uniform_nodes(0.0, width, ny)
        };
        let mut values = Vec::with_capacity(nx * y.len());
        for &yj in &y {
            values.extend(x.iter().map(|&xi| f(xi, yj)));
        }
        StripGrid::new(x, y, values)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.x.len() + i]
    }

    pub fn width(&self) -> f64 {
        self.y[self.y.len() - 1] - self.y[0]
    }

    fn row(&self, j: usize) -> &[f64] {
        let nx = self.x.len();
        &self.values[j * nx..(j + 1) * nx]
    }

    /// The 1D profile seen by cell row `j`: the mean of grid rows `j` and `j+1`.
    /// Its cell slopes are exactly the `∂x` of the 2D cells in that row.
    fn slice(&self, j: usize) -> Result<Profile> {
        let v = if self.y.len() == 1 {
            self.row(0).to_vec()
        } else {
            self.row(j)
                .iter()
                .zip(self.row(j + 1))
                .map(|(a, b)| 0.5 * (a + b))
                .collect()
        };
        Profile::new(self.x.clone(), v)
    }
}

struct Cells {
    totals: Vec<f64>,
    any_dy: bool,
}

fn cells_2d(gr: &StripGrid, w: &Potential) -> Result<Cells> {
    let (nx, ny) = (gr.x.len(), gr.y.len());
    let mut totals = Vec::with_capacity((nx - 1) * (ny - 1));
    let mut any_dy = false;
    for j in 0..ny - 1 {
        let hy = gr.y[j + 1] - gr.y[j];
        for i in 0..nx - 1 {
            let hx = gr.x[i + 1] - gr.x[i];
            let (u00, u10) = (gr.at(i, j), gr.at(i + 1, j));
            let (u01, u11) = (gr.at(i, j + 1), gr.at(i + 1, j + 1));
            let dx = 0.5 * ((u10 - u00) + (u11 - u01)) / hx;
            let dy = 0.5 * ((u01 - u00) + (u11 - u10)) / hy;
            any_dy |= dy != 0.0;
            let norm = dx.hypot(dy);
            let cell = i + j * (nx - 1);
            let s = snap_slope(norm, Some(cell))?;
            let kin = 1.0 - ((1.0 - s) * (1.0 + s)).sqrt();
            let um = 0.25 * (u00 + u10 + u01 + u11);
            totals.push((kin + w.w(um)) * hx * hy);
        }
    }
    Ok(Cells { totals, any_dy })
}

/// `Σ (g(|∇u|) + W(u)) ΔxΔy` with bilinear cell gradients. A grid with a
/// single `y` node is read as a one-dimensional profile.
pub fn action_2d(gr: &StripGrid, w: &Potential) -> Result<f64> {
    if gr.y.len() == 1 {
        let one = weights::constant(1.0)?;
        return Ok(action(&gr.slice(0)?, w, &one)?.total);
    }
    Ok(pairwise_sum(&cells_2d(gr, w)?.totals))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub total_2d: f64,
    pub width: f64,
    /// 1D action of each cell-row slice.
    pub slice_actions: Vec<f64>,
    pub mean_slice: f64,
    pub min_slice: f64,
    /// `total_2d − Σ Δy · slice action`; nonnegative by construction.
    pub margin_vs_slices: f64,
    /// `total_2d − width · min_slice`.
    pub margin_vs_min: f64,
    /// `total_2d − width · reference`, when a 1D minimum action is supplied.
    pub margin_vs_reference: Option<f64>,
    pub y_dependent: bool,
    pub pass: bool,
}

/// Compares the strip action with its cell-row slices: the 2D total dominates
/// the `Δy`-weighted slice sum, strictly when some cell has `∂y ≠ 0`.
pub fn slice_compare(gr: &StripGrid, w: &Potential, reference_1d: Option<f64>) -> Result<SliceReport> {
    let one = weights::constant(1.0)?;
    if gr.y.len() == 1 {
        let a1 = action(&gr.slice(0)?, w, &one)?.total;
        return Ok(SliceReport {
            total_2d: a1,
            width: 0.0,
            slice_actions: vec![a1],
            mean_slice: a1,
            min_slice: a1,
            margin_vs_slices: 0.0,
            margin_vs_min: 0.0,
            margin_vs_reference: reference_1d.map(|r| a1 - r),
            y_dependent: false,
            pass: reference_1d.is_none_or(|r| a1 >= r),
        });
    }
    let cells = cells_2d(gr, w)?;
    let total_2d = pairwise_sum(&cells.totals);
    let ny = gr.y.len();
    let mut slice_actions = Vec::with_capacity(ny - 1);
    let mut weighted = Vec::with_capacity(ny - 1);
    for j in 0..ny - 1 {
        let a1 = action(&gr.slice(j)?, w, &one)?.total;
        slice_actions.push(a1);
        weighted.push((gr.y[j + 1] - gr.y[j]) * a1);
    }
    let width = gr.width();
    let slice_sum = pairwise_sum(&weighted);
    let mean_slice = slice_sum / width;
    let min_slice = slice_actions.iter().copied().fold(f64::INFINITY, f64::min);
    let margin_vs_slices = total_2d - slice_sum;
    let margin_vs_min = total_2d - width * min_slice;
    let margin_vs_reference = reference_1d.map(|r| total_2d - width * r);
    // Round-off allowance on the equality case.
    let slack = 1e-12 * total_2d.abs().max(1.0);
    let pass = if cells.any_dy {
        margin_vs_slices > 0.0 && margin_vs_min > 0.0 && margin_vs_reference.is_none_or(|m| m > 0.0)
    } else {
        margin_vs_slices.abs() <= slack && margin_vs_reference.is_none_or(|m| m >= -slack)
    };
    Ok(SliceReport {
        total_2d,
        width,
        slice_actions,
        mean_slice,
        min_slice,
        margin_vs_slices,
        margin_vs_min,
        margin_vs_reference,
        y_dependent: cells.any_dy,
        pass,
    })
}
