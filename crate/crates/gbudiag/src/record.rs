//! Time-series records, the run verdict and the report files.

use std::io::{Read, Write};
use std::path::Path;

use pdesolve::StopReason;
use serde::{Deserialize, Serialize};

use crate::DiagError;

/// One monitor sample. Field order is the CSV column order; the two
/// trailing columns extend the fixed set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub dt: f64,
    pub max_u: f64,
    pub max_grad: f64,
    pub flux_argmax_s: f64,
    pub flux_at_origin: f64,
    pub margin_ux: f64,
    pub margin_us: f64,
    #[serde(rename = "margin_J")]
    pub margin_j: f64,
    #[serde(rename = "margin_Jbar")]
    pub margin_jbar: f64,
    pub bernstein_c1_est: f64,
    pub nondeg_quotient_max: f64,
    pub corner_coeff: f64,
    pub profile_bound_quotient: f64,
    pub min_u: f64,
    pub mirror_defect: f64,
}

pub const CSV_COLUMNS: [&str; 16] = [
    "t",
    "dt",
    "max_u",
    "max_grad",
    "flux_argmax_s",
    "flux_at_origin",
    "margin_ux",
    "margin_us",
    "margin_J",
    "margin_Jbar",
    "bernstein_c1_est",
    "nondeg_quotient_max",
    "corner_coeff",
    "profile_bound_quotient",
    "min_u",
    "mirror_defect",
];

pub fn write_records<W: Write>(w: W, records: &[DiagnosticsRecord]) -> Result<(), DiagError> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(CSV_COLUMNS)?;
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<DiagnosticsRecord>, DiagError> {
    let mut rd = csv::Reader::from_reader(r);
    let head: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if head != CSV_COLUMNS {
        return Err(DiagError::Report(format!("unexpected columns {head:?}")));
    }
    rd.deserialize().map(|r| r.map_err(DiagError::from)).collect()
}

/// Facts about a finished run that the verdict needs besides the series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub stop_reason: Option<StopReason>,
    pub steps: u64,
    pub t: f64,
    pub t_end: f64,
    pub m_stop: f64,
    pub s0: f64,
    /// Flux `max/median` at the final state.
    pub flux_peak_ratio: f64,
    pub advisories: Vec<String>,
    #[serde(default)]
    pub extra: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub blow_up_truncated: bool,
    /// `|flux_argmax_s|` at the last record.
    pub localizer_arc_offset: Option<f64>,
    pub invariant_violations: Vec<String>,
}

/// A boundary peak at least this many times the median flux counts as peaked.
pub const PEAK_RATIO: f64 = 2.0;
pub const MAX_PRINCIPLE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Hard invariants: `max u` never rises more than `1e−8‖u₀‖∞` above its
/// running minimum, and `u ≥ −1e−12`.
pub fn invariant_violations(records: &[DiagnosticsRecord]) -> Vec<String> {
    let mut out = Vec::new();
    let Some(first) = records.first() else {
        return out;
    };
    let tol = MAX_PRINCIPLE_TOL * first.max_u.abs();
    let mut lowest = first.max_u;
    for r in records {
        if r.max_u > lowest + tol {
            out.push(format!("max principle: max u = {} at t = {} exceeds earlier {}", r.max_u, r.t, lowest));
        }
        lowest = lowest.min(r.max_u);
        if r.min_u < -POSITIVITY_TOL {
            out.push(format!("positivity: min u = {} at t = {}", r.min_u, r.t));
        }
    }
    out
}

/// Truncation means the run stopped on `M_stop` or on `dt` underflow before
/// `t_end`, at a gradient of at least `M_stop`, with a peaked flux profile.
pub fn verdict(summary: &RunSummary, records: &[DiagnosticsRecord]) -> Verdict {
    let last = records.last();
    let stopped = matches!(summary.stop_reason, Some(StopReason::MStop | StopReason::DtUnderflow));
    let blow_up_truncated = stopped
        && summary.t < summary.t_end
        && last.is_some_and(|r| r.max_grad >= summary.m_stop)
        && summary.flux_peak_ratio >= PEAK_RATIO;
    Verdict {
        blow_up_truncated,
        localizer_arc_offset: last.map(|r| r.flux_argmax_s.abs()),
        invariant_violations: invariant_violations(records),
    }
}

pub const SERIES_FILE: &str = "diagnostics.csv";
pub const SUMMARY_FILE: &str = "run.json";
pub const VERDICT_FILE: &str = "verdict.json";

/// Writes the series, the summary and the verdict into `dir`.
pub fn write_report(dir: &Path, summary: &RunSummary, records: &[DiagnosticsRecord]) -> Result<Verdict, DiagError> {
    std::fs::create_dir_all(dir)?;
    write_records(std::io::BufWriter::new(std::fs::File::create(dir.join(SERIES_FILE))?), records)?;
    std::fs::write(dir.join(SUMMARY_FILE), serde_json::to_string_pretty(summary)?)?;
    let v = verdict(summary, records);
    std::fs::write(dir.join(VERDICT_FILE), serde_json::to_string_pretty(&v)?)?;
    Ok(v)
}

/// Recomputes the verdict of a run directory from its files.
pub fn reread_report(dir: &Path) -> Result<Verdict, DiagError> {
    let records = read_records(std::fs::File::open(dir.join(SERIES_FILE))?)?;
    let summary: RunSummary = serde_json::from_str(&std::fs::read_to_string(dir.join(SUMMARY_FILE))?)?;
    let v = verdict(&summary, &records);
    std::fs::write(dir.join(VERDICT_FILE), serde_json::to_string_pretty(&v)?)?;
    Ok(v)
}
