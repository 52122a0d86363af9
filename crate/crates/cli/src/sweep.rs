//! Independent rows on a thread pool, merged in row order.

use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::commands::{run_one, Summary};
use crate::config::{merge, Command, RunConfig};
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct Row {
    pub row: usize,
    pub dir: String,
    pub exit_code: u8,
    pub error: Option<String>,
    #[serde(flatten)]
    pub summary: Summary,
}

/// Expands the rows, checks they share one command and runs them. Returns the
/// table and whether every row succeeded.
pub fn sweep(
    cfg: &RunConfig,
    out: &Path,
    jobs: Option<usize>,
    seed: Option<u64>,
) -> Result<(Vec<Row>, bool), CliError> {
    let base = cfg.base.clone().unwrap_or_else(|| Value::Object(Default::default()));
    let mut rows = Vec::with_capacity(cfg.runs.len());
    for (i, r) in cfg.runs.iter().enumerate() {
        let mut row = RunConfig::from_value(merge(&base, r)).map_err(|e| CliError::Config(format!("runs[{i}].{e}")))?;
        if let Some(s) = seed {
            row.solver.seed = s;
        }
        row.format = cfg.format;
        row.profile = row.profile.or_else(|| cfg.profile.clone());
        rows.push(row);
    }
    let mut command = None;
    for (i, r) in rows.iter().enumerate() {
        let c = r.command().map_err(|e| CliError::Config(format!("runs[{i}].{e}")))?;
        if c == Command::Sweep {
            return Err(CliError::Config(format!("runs[{i}].command: sweeps cannot be nested")));
        }
        match command {
            None => command = Some(c),
            Some(first) if first != c => {
                return Err(CliError::Config(format!(
                    "runs[{i}].command: {c:?} differs from {first:?}; a sweep must be homogeneous"
                )))
            }
            _ => {}
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("jobs: {e}")))?;
    let table: Vec<Row> = pool.install(|| {
        rows.par_iter()
            .enumerate()
            .map(|(i, r)| {
                let dir = format!("row_{i:03}");
                let result = run_one(r, &out.join(&dir));
                info!("row {i} finished");
                match result {
                    Ok(summary) => Row {
                        row: i,
                        dir,
                        exit_code: 0,
                        error: None,
                        summary,
                    },
                    Err(e) => Row {
                        row: i,
                        dir,
                        exit_code: e.exit_code(),
                        error: Some(e.to_string()),
                        summary: Summary::default(),
                    },
                }
            })
            .collect()
    });
    let ok = table.iter().all(|r| r.exit_code == 0);
    Ok((table, ok))
}
