//! CSV exports.

use std::path::Path;

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::observables::ContactRecord;
use crate::pathspace::WeightedSample;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let offset = e.position().map(|p| p.byte()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, offset, io),
        other => Error::Serde(format!("{}: {other:?}", path.display())),
    }
}

/// One row per (frame, node, component): `time, theta, component, value, penalty`.
pub fn export_trajectory_csv(traj: &Trajectory, path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let e = |e| csv_err(path, e);
    w.write_record(["time", "theta", "component", "value", "penalty"]).map_err(e)?;
    let (m, d) = (traj.meta.m, traj.meta.d());
    let dtheta = 1.0 / (m as f64 + 1.0);
    let mut rows = 0;
    for i in 0..traj.len() {
        for j in 0..m {
            let theta = (j as f64 + 1.0) * dtheta;
            for c in 0..d {
                w.write_record(&[
                    traj.times[i].to_string(),
                    theta.to_string(),
                    c.to_string(),
                    traj.states[i].node(j)[c].to_string(),
                    traj.penalty[i].node(j)[c].to_string(),
                ])
                .map_err(e)?;
                rows += 1;
            }
        }
    }
    w.flush().map_err(|err| Error::io(path, 0, err))?;
    Ok(rows)
}

/// `time, cluster_count, positions` with positions `;`-separated.
pub fn export_contacts_csv(records: &[ContactRecord], dtheta: f64, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let e = |e| csv_err(path, e);
    w.write_record(["time", "cluster_count", "positions"]).map_err(e)?;
    for r in records {
        let pos: Vec<String> = r.positions(dtheta).iter().map(|p| p.to_string()).collect();
        w.write_record(&[r.time.to_string(), r.cluster_count().to_string(), pos.join(";")]).map_err(e)?;
    }
    w.flush().map_err(|err| Error::io(path, 0, err))
}

/// `sample, log_weight, theta, component, value`.
pub fn export_samples_csv(samples: &[WeightedSample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    let e = |e| csv_err(path, e);
    w.write_record(["sample", "log_weight", "theta", "component", "value"]).map_err(e)?;
    for (s, ws) in samples.iter().enumerate() {
        let m = ws.path.m();
        let dtheta = 1.0 / (m as f64 + 1.0);
        for j in 0..m {
            for (c, v) in ws.path.node(j).iter().enumerate() {
                w.write_record(&[
                    s.to_string(),
                    ws.log_weight.to_string(),
                    ((j as f64 + 1.0) * dtheta).to_string(),
                    c.to_string(),
                    v.to_string(),
                ])
                .map_err(e)?;
            }
        }
    }
    w.flush().map_err(|err| Error::io(path, 0, err))
}
