use thiserror::Error;

use crate::functional::Profile;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A slope left the closed unit ball where the relativistic density is defined.
    #[error("slope {slope} outside [-1, 1]{}", cell_suffix(*.cell))]
    Domain { slope: f64, cell: Option<usize> },

    /// The flux `s / sqrt(1 - s^2)` was requested at `|s| >= 1`.
    #[error("flux is singular at slope {slope}{}", cell_suffix(*.cell))]
    Singularity { slope: f64, cell: Option<usize> },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("operation requires a uniform grid (cell {cell} has width {width}, expected {expected})")]
    UnsupportedGrid { cell: usize, width: f64, expected: f64 },

    #[error("malformed profile: {0}")]
    Profile(String),

    #[error("surgery rejected: {0}")]
    Surgery(String),

    #[error("hypothesis {hypothesis} violated: {detail}")]
    Hypothesis { hypothesis: &'static str, detail: String },

    #[error("potential vanishes at interior value u = {u}; the transition stalls")]
    DegenerateWell { u: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("solver configuration: {0}")]
    Config(String),

    #[error(
        "no convergence after {iterations} iterations (projected gradient {residual:e}, best action {best_action})"
    )]
    NonConvergence {
        iterations: usize,
        residual: f64,
        best_action: f64,
        best: Box<Profile>,
    },

    #[error("expression: {0}")]
    Expression(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn cell_suffix(cell: Option<usize>) -> String {
    match cell {
        Some(c) => format!(" in cell {c}"),
        None => String::new(),
    }
}
