//! Grid snapshots: one JSON header line, then one CSV row per grid row.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::grid::{GridField, GridSpec};
use crate::SolveError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub grid: GridSpec,
    pub t: f64,
    pub p: Option<f64>,
    pub provenance: serde_json::Value,
}

pub fn write_snapshot<W: Write>(mut w: W, header: &SnapshotHeader, field: &GridField) -> Result<(), SolveError> {
    let io = |e: std::io::Error| SolveError::Snapshot(e.to_string());
    let line = serde_json::to_string(header).map_err(|e| SolveError::Snapshot(e.to_string()))?;
    writeln!(w, "{line}").map_err(io)?;
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for row in field.values.chunks(header.grid.nx) {
        out.write_record(row.iter().map(|v| v.to_string())).map_err(|e| SolveError::Snapshot(e.to_string()))?;
    }
    out.flush().map_err(io)
}

pub fn read_snapshot<R: BufRead>(mut r: R) -> Result<(SnapshotHeader, Vec<f64>), SolveError> {
    let bad = |m: String| SolveError::Snapshot(m);
    let mut first = String::new();
    r.read_line(&mut first).map_err(|e| bad(e.to_string()))?;
    let header: SnapshotHeader = serde_json::from_str(first.trim()).map_err(|e| bad(format!("header: {e}")))?;
    let mut values = Vec::with_capacity(header.grid.nx * header.grid.ny);
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    for rec in rd.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != header.grid.nx {
            return Err(bad(format!("row of {} values, expected {}", rec.len(), header.grid.nx)));
        }
        for f in rec.iter() {
            values.push(f.trim().parse::<f64>().map_err(|e| bad(format!("{f}: {e}")))?);
        }
    }
    if values.len() != header.grid.nx * header.grid.ny {
        return Err(bad(format!("{} values, expected {}", values.len(), header.grid.nx * header.grid.ny)));
    }
    Ok((header, values))
}
