use curvegeom::{build_chart, BoundaryChart, DomainSpec, PlanarDomain};

use crate::checks::{check_all, check_reflection, ReflectionLine, SampleConfig};
use crate::report::HypothesisReport;
use crate::HypoError;

/// A domain with its chart, cap `y0` and the report they produce.
#[derive(Clone, Debug)]
pub struct Preset {
    pub domain: PlanarDomain,
    pub chart: BoundaryChart,
    pub y0: f64,
    pub report: HypothesisReport,
    pub notes: Vec<String>,
}

/// Ellipse with semi-axes `a > b`, lower co-vertex at the origin and `y0 = b`.
///
/// `s0` is the largest `k/64` of the quarter perimeter (`k < 64`) with `β(s0) < y0`.
pub fn preset_ellipse(a: f64, b: f64) -> Result<Preset, HypoError> {
    if a == b {
        return Err(HypoError::DiskExcluded);
    }
    if !(a > b && b > 0.0) {
        return Err(HypoError::InvalidPreset(format!("need a > b > 0, got a = {a}, b = {b}")));
    }
    let domain = PlanarDomain::new(DomainSpec::Ellipse { a, b })?;
    let quarter = 0.5 * domain.half_length();
    let y0 = b;
    let s0 = (1..64)
        .rev()
        .map(|k| quarter * k as f64 / 64.0)
        .find(|&s| domain.eval(domain.t_of_s(s)).p[1] < y0)
        .ok_or_else(|| HypoError::InvalidPreset("no sampled s0 keeps Gamma below y0".into()))?;
    let chart = build_chart(&domain, s0)?;
    let report = check_all(&domain, &chart, y0);
    let notes = vec![format!("gamma(s0).y = {} < y0 = {y0}", chart.gamma(s0)[1])];
    Ok(Preset { domain, chart, y0, report, notes })
}

/// A symmetric domain tangent to `y = 0` at the origin, with `y0 = ∞`.
///
/// `s0` starts at the CURV/TANG limit (at most 90% of the half perimeter) and
/// shrinks by factors of 0.9 until every check passes; when none does, the
/// report of the smallest candidate is returned.
pub fn preset_almost_flat(spec: DomainSpec) -> Result<Preset, HypoError> {
    let domain = PlanarDomain::new(spec)?;
    let y0 = f64::INFINITY;
    let mut s0 = 0.9 * domain.half_length();
    let first = build_chart(&domain, s0)?;
    let k0 = first.curvature(0.0);
    let r0 = if k0 > curvegeom::chart::FLAT_CURVATURE { 1.0 / k0 } else { f64::INFINITY };
    let top = domain.bbox()[3];
    let probe = check_all(&domain, &first, y0);
    if let Some(limit) = probe.s0_limit {
        if limit > 0.0 {
            s0 = limit;
        }
    }
    // Without clearance the axis normal already reaches the centre at s = 0,
    // and no smaller Γ can help.
    let tries = if top < r0 { 48 } else { 1 };
    let mut best = None;
    for _ in 0..tries {
        let chart = build_chart(&domain, s0)?;
        let report = check_all(&domain, &chart, y0);
        let done = report.pass;
        best = Some((chart, report));
        if done {
            break;
        }
        s0 *= 0.9;
    }
    let (chart, report) = best.expect("at least one candidate");
    let mut notes = Vec::new();
    if top < r0 {
        notes.push(format!("evolute clearance: max y over the closure = {top} < R(0) = {r0}"));
    } else {
        notes.push(format!("closure not inside {{y < R(0)}}: max y = {top} >= R(0) = {r0}"));
    }
    let curv = report.entry(crate::Condition::CURV);
    notes.push(if curv.pass {
        "radius of curvature nonincreasing on [0, s0]".to_string()
    } else {
        format!("radius of curvature increases near {:?}", curv.witness)
    });
    if let Some(s) = reflection_threshold(&domain, &chart) {
        notes.push(format!("reflection across Lambda_s first fails at s = {s}"));
    }
    Ok(Preset { domain, chart, y0, report, notes })
}

/// Smallest of 16 sampled `s ∈ (0, s0]` whose normal-line reflection fails.
fn reflection_threshold(domain: &PlanarDomain, chart: &BoundaryChart) -> Option<f64> {
    (1..=16)
        .map(|k| chart.s0 * k as f64 / 16.0)
        .find(|&s| !check_reflection(domain, ReflectionLine::normal_line(chart, s), SampleConfig::default()).pass)
}
