//! CSV export and import of profiles and trajectories, JSON for everything else.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::Profile;
use crate::solver::Trajectory;

/// 17 significant digits: enough to round-trip every `f64`.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_profile_csv(path: impl AsRef<Path>, p: &Profile) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "u"])?;
    for (t, u) in p.nodes().iter().zip(p.values()) {
        w.write_record([fmt(*t), fmt(*u)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_profile_csv(path: impl AsRef<Path>) -> Result<Profile> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "t" || &headers[1] != "u" {
        return Err(Error::Profile(format!(
            "expected header \"t,u\", got {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let (mut t, mut u) = (Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Profile(format!("row {}: bad number in column {i}", line + 2)))
        };
        t.push(parse(0)?);
        u.push(parse(1)?);
    }
    Profile::new(t, u)
}

pub fn write_trajectory_csv(path: impl AsRef<Path>, tr: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "u", "p"])?;
    for k in 0..tr.t.len() {
        w.write_record([fmt(tr.t[k]), fmt(tr.u[k]), fmt(tr.p[k])])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}
