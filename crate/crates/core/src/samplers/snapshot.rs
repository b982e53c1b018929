use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::collocation::{CollocationSet, Origin};
use crate::error::{Error, Result};

/// The collocation set as it stood at a training iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub iteration: usize,
    pub set: CollocationSet,
}

pub fn snapshot_header(dim: usize) -> String {
    let mut h = String::from("iteration,point_id,origin");
    for k in 0..dim {
        h.push_str(&format!(",c{k}"));
    }
    h
}

/// Writes `iteration,point_id,origin,c0,c1[,c2…]` rows, one per point per snapshot.
pub fn write_snapshots(path: &Path, snapshots: &[Snapshot]) -> Result<()> {
    let dim = snapshots.first().map_or(1, |s| s.set.dim());
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", snapshot_header(dim)).map_err(io)?;
    for snap in snapshots {
        for i in 0..snap.set.len() {
            write!(w, "{},{},{}", snap.iteration, i, snap.set.origins()[i]).map_err(io)?;
            for x in snap.set.point(i) {
                write!(w, ",{x:e}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Reads a snapshot CSV back, grouping consecutive rows by iteration.
pub fn read_snapshots(path: &Path) -> Result<Vec<Snapshot>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e.to_string()))?;
    let header = reader.headers().map_err(|e| Error::parse(path, e.to_string()))?.clone();
    let dim = header.len().saturating_sub(3);
    if dim == 0 || header.iter().collect::<Vec<_>>().join(",") != snapshot_header(dim) {
        return Err(Error::parse(path, "expected header `iteration,point_id,origin,c0,…`"));
    }
    let mut out: Vec<Snapshot> = Vec::new();
    let mut coords = vec![0.0; dim];
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let bad = |what: &str| Error::parse(path, format!("row {}: bad {what}", row + 1));
        let iteration: usize = rec[0].parse().map_err(|_| bad("iteration"))?;
        let id: usize = rec[1].parse().map_err(|_| bad("point_id"))?;
        let origin: Origin = rec[2].parse().map_err(|_| bad("origin"))?;
        for k in 0..dim {
            coords[k] = rec[3 + k].parse().map_err(|_| bad("coordinate"))?;
        }
        if out.last().is_none_or(|s| s.iteration != iteration) {
            out.push(Snapshot { iteration, set: CollocationSet::new(dim, Vec::new(), Origin::Initial) });
        }
        let snap = out.last_mut().expect("just pushed");
        if id != snap.set.len() {
            return Err(bad("point_id sequence"));
        }
        snap.set.push(&coords, origin);
    }
    Ok(out)
}
