use curvegeom::domain::{dot, norm};
use curvegeom::{BoundaryChart, CurveJet, PlanarDomain, Point};
use rayon::prelude::*;

use crate::report::{Condition, HypothesisEntry, HypothesisReport};
use crate::CONTAIN_TOL;

/// Sample counts of the checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleConfig {
    /// Boundary points per half, and normals swept over `[0, s0]`.
    pub boundary: usize,
    /// Minimum interior samples of each reflected half-region.
    pub region: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { boundary: 4096, region: 10_000 }
    }
}

impl SampleConfig {
    pub fn doubled(self) -> Self {
        SampleConfig { boundary: 2 * self.boundary, region: 2 * self.region }
    }
}

/// A mirror line through `point` with unit `normal`; the reflected half is
/// `{normal · (P − point) > 0}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflectionLine {
    pub point: Point,
    pub normal: Point,
}

impl ReflectionLine {
    /// `Λ_s = γ(s) + ℝN(s)`, reflecting the half-plane `H_s` ahead of `γ(s)`.
    pub fn normal_line(chart: &BoundaryChart, s: f64) -> Self {
        let f = chart.frame(s);
        ReflectionLine { point: f.gamma, normal: f.t }
    }

    /// `y = y0`, reflecting `{y > y0}`.
    pub fn horizontal(y0: f64) -> Self {
        ReflectionLine { point: [0.0, y0], normal: [0.0, 1.0] }
    }

    pub fn side(&self, p: Point) -> f64 {
        dot([p[0] - self.point[0], p[1] - self.point[1]], self.normal)
    }

    pub fn reflect(&self, p: Point) -> Point {
        let d = 2.0 * self.side(p);
        [p[0] - d * self.normal[0], p[1] - d * self.normal[1]]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionResult {
    pub pass: bool,
    /// Most negative signed distance (positive inside) of a reflected sample.
    pub margin: f64,
    /// Reflected image attaining the margin.
    pub witness: Option<Point>,
    pub samples: usize,
    pub note: Option<String>,
}

/// Reflects the part of `Ω̄` on the positive side of `line` and tests the images
/// against the inside-test relaxed by [`CONTAIN_TOL`].
pub fn check_reflection(domain: &PlanarDomain, line: ReflectionLine, cfg: SampleConfig) -> ReflectionResult {
    let mut pts = lattice_in(domain, cfg.region, |p| line.side(p) > 0.0);
    pts.extend(boundary_loop(domain, cfg.boundary).into_iter().map(|(_, j)| j.p).filter(|&p| line.side(p) > 0.0));
    if pts.is_empty() {
        return ReflectionResult {
            pass: true,
            margin: 0.0,
            witness: None,
            samples: 0,
            note: Some("half-region is empty".into()),
        };
    }
    let images: Vec<Point> = pts.iter().map(|&p| line.reflect(p)).collect();
    let dist: Vec<f64> = images.par_iter().map(|&q| domain.signed_distance(q)).collect();
    let (k, margin) = argmin(&dist);
    ReflectionResult { pass: margin >= -CONTAIN_TOL, margin, witness: Some(images[k]), samples: pts.len(), note: None }
}

/// All eight conditions with the default sample counts; `y0 = f64::INFINITY` drops the cap.
pub fn check_all(domain: &PlanarDomain, chart: &BoundaryChart, y0: f64) -> HypothesisReport {
    check_all_with(domain, chart, y0, SampleConfig::default())
}

pub fn check_all_with(domain: &PlanarDomain, chart: &BoundaryChart, y0: f64, cfg: SampleConfig) -> HypothesisReport {
    let cfg = SampleConfig { boundary: cfg.boundary.max(4096), region: cfg.region.max(10_000) };
    let right = domain.sample_right_half(cfg.boundary);
    let (curv, tang, s0_limit) = curvature_and_tangent(chart);
    let sweep = sweep_normals(domain, chart, y0, cfg.boundary);
    let refl_s0 = check_reflection(domain, ReflectionLine::normal_line(chart, chart.s0), cfg);
    let refl_plus = if y0.is_finite() {
        let r = check_reflection(domain, ReflectionLine::horizontal(y0), cfg);
        let e = HypothesisEntry::judged(Condition::REFL_PLUS, r.margin, r.witness, r.samples);
        match r.note {
            Some(n) => e.note(n),
            None => e,
        }
    } else {
        HypothesisEntry {
            id: Condition::REFL_PLUS,
            pass: true,
            applicable: false,
            margin: 0.0,
            witness: None,
            samples: 0,
            note: Some("y0 = inf: Omega ∩ {y > y0} is empty".into()),
        }
    };
    let mut refl_s0_entry =
        HypothesisEntry::judged(Condition::REFL_S0, refl_s0.margin, refl_s0.witness, refl_s0.samples);
    refl_s0_entry.note = refl_s0.note;
    let entries = vec![
        symmetry(domain, &right),
        curv,
        tang,
        x_convexity(&right),
        sweep.nuy,
        refl_s0_entry,
        refl_plus,
        sweep.centerout,
    ];
    HypothesisReport::new(chart.s0, y0, entries, s0_limit)
}

fn argmin(v: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, &x) in v.iter().enumerate() {
        if x < best.1 {
            best = (k, x);
        }
    }
    best
}

fn mirror(p: Point) -> Point {
    [-p[0], p[1]]
}

fn outward_normal(j: &CurveJet) -> Point {
    let t = j.tangent();
    [t[1], -t[0]]
}

/// Boundary samples of both halves, `(t, jet)`, without repeating the two axis points.
fn boundary_loop(domain: &PlanarDomain, n: usize) -> Vec<(f64, CurveJet)> {
    let right = domain.sample_right_half(n);
    let mut out: Vec<(f64, CurveJet)> = right.iter().skip(1).rev().map(|&(t, _)| (-t, domain.eval(-t))).collect();
    out.truncate(out.len().saturating_sub(1));
    out.extend(right);
    out
}

/// Cell-centred lattice points of the bounding box inside `Ω` and `keep`,
/// refined until at least `target` are found (or the lattice reaches 4096²).
fn lattice_in<F: Fn(Point) -> bool + Sync>(domain: &PlanarDomain, target: usize, keep: F) -> Vec<Point> {
    let [x0, y0, x1, y1] = domain.bbox();
    let mut m = 128usize;
    loop {
        let (dx, dy) = ((x1 - x0) / m as f64, (y1 - y0) / m as f64);
        let rows: Vec<Vec<Point>> = (0..m)
            .into_par_iter()
            .map(|j| {
                let y = y0 + (j as f64 + 0.5) * dy;
                let xs = domain.horizontal_crossings(y);
                (0..m)
                    .map(|i| [x0 + (i as f64 + 0.5) * dx, y])
                    .filter(|p| xs.partition_point(|&c| c < p[0]) % 2 == 1 && keep(*p))
                    .collect()
            })
            .collect();
        let pts: Vec<Point> = rows.into_iter().flatten().collect();
        if pts.len() >= target || m >= 4096 {
            return pts;
        }
        let frac = pts.len().max(1) as f64 / (m * m) as f64;
        let next = ((target as f64 / frac).sqrt() * 1.05).ceil() as usize;
        m = next.clamp(2 * m, 4096);
    }
}

fn symmetry(domain: &PlanarDomain, right: &[(f64, CurveJet)]) -> HypothesisEntry {
    let mut worst = (0.0, None);
    for &(t, j) in right {
        let q = domain.eval(-t).p;
        let m = mirror(j.p);
        let d = norm([q[0] - m[0], q[1] - m[1]]);
        if worst.1.is_none() || d > worst.0 {
            worst = (d, Some(j.p));
        }
    }
    HypothesisEntry::judged(Condition::SYM, 0.0 - worst.0 + 0.0, worst.1, right.len())
}

fn x_convexity(right: &[(f64, CurveJet)]) -> HypothesisEntry {
    let mut worst = (f64::INFINITY, None);
    let mut n = 0;
    for (_, j) in right.iter().filter(|(_, j)| j.p[0] > 0.0) {
        n += 1;
        let nx = outward_normal(j)[0];
        if nx < worst.0 {
            worst = (nx, Some(j.p));
        }
    }
    if n == 0 {
        return HypothesisEntry::judged(Condition::XCONV, 0.0, None, 0).note("no boundary samples with x > 0");
    }
    HypothesisEntry::judged(Condition::XCONV, worst.0, worst.1, n)
}

/// CURV margin: `min(K(0), min K′, min jump of K at junctions)`.
/// TANG margin: `min over 0 < s < s0 of min(α′, β′/s)`.
fn curvature_and_tangent(chart: &BoundaryChart) -> (HypothesisEntry, HypothesisEntry, Option<f64>) {
    let right = chart.right_samples();
    let k0 = right[0].k;
    let mut curv = (k0, right[0].gamma);
    let mut tang = (f64::INFINITY, None);
    let mut limit = None;
    let mut last_good = 0.0;
    for (i, c) in right.iter().enumerate() {
        let mut local = c.kp;
        if i > 0 && right[i - 1].s == c.s {
            local = local.min(c.k - right[i - 1].k);
        }
        if local < curv.0 {
            curv = (local, c.gamma);
        }
        let mut ok = local >= -CONTAIN_TOL && k0 >= -CONTAIN_TOL;
        if c.s > 0.0 && c.s < chart.s0 {
            let m = c.d1[0].min(c.d1[1] / c.s);
            if m < tang.0 {
                tang = (m, Some(c.gamma));
            }
            ok &= m > 0.0;
        }
        if ok {
            if limit.is_none() {
                last_good = c.s;
            }
        } else if limit.is_none() {
            limit = Some(last_good);
        }
    }
    let curv = HypothesisEntry::judged(Condition::CURV, curv.0, Some(curv.1), right.len());
    let n_inner = right.iter().filter(|c| c.s > 0.0 && c.s < chart.s0).count();
    let mut tang = HypothesisEntry::judged(Condition::TANG, tang.0, tang.1, n_inner);
    if !tang.pass && tang.margin.abs() <= CONTAIN_TOL {
        tang = tang.note(
            "beta' vanishes: the boundary is flat there; the locally flat case needs no curvature chart \
             and is outside these checks",
        );
    }
    (curv, tang, limit)
}

struct Sweep {
    nuy: HypothesisEntry,
    centerout: HypothesisEntry,
}

/// Walks the normals `γ(s) + rN(s)`, `0 ≤ r ≤ R(s)`, for `s ∈ [0, s0]`.
///
/// Along each normal, `ω̄₀` reaches up to the last point of `Ω̄ ∩ {y ≤ y0}` before
/// `R(s)`; CENTEROUT needs that point strictly below `R(s)`. The boundary crossings
/// met on the way are exactly the points of `∂Ω ∩ ∂ω₀` with `r > 0`, where NUY
/// is evaluated.
fn sweep_normals(domain: &PlanarDomain, chart: &BoundaryChart, y0: f64, n: usize) -> Sweep {
    let bb = domain.bbox();
    let far = 4.0 * (bb[2] - bb[0]).hypot(bb[3] - bb[1]);
    let mut ss: Vec<f64> = (0..=n).map(|k| chart.s0 * k as f64 / n as f64).collect();
    ss.extend(chart.right_samples().windows(2).filter(|w| w[0].s == w[1].s).map(|w| w[0].s));
    ss.sort_by(f64::total_cmp);
    ss.dedup();

    struct Normal {
        margin: f64,
        end: Point,
        hits: Vec<Point>,
    }
    let normals: Vec<Normal> = ss
        .par_iter()
        .map(|&s| {
            let f = chart.frame(s);
            let radius = f.radius();
            let rc = radius.min(far);
            let ycap = if !y0.is_finite() {
                f64::INFINITY
            } else if f.gamma[1] > y0 {
                0.0
            } else if f.n[1] > 0.0 {
                (y0 - f.gamma[1]) / f.n[1]
            } else {
                f64::INFINITY
            };
            let rlim = rc.min(ycap);
            let tip = [f.gamma[0] + f.n[0], f.gamma[1] + f.n[1]];
            let crossings = domain.line_crossings(f.gamma, tip, 1e-9, rc);
            let inner: Vec<f64> = crossings.iter().copied().filter(|&c| c < rlim).collect();
            let r_end = if inner.len().is_multiple_of(2) { rlim } else { *inner.last().unwrap() };
            let at = |r: f64| [f.gamma[0] + r * f.n[0], f.gamma[1] + r * f.n[1]];
            let hits = crossings.iter().filter(|&&c| c <= rlim + CONTAIN_TOL).map(|&c| at(c)).collect();
            Normal { margin: rc - r_end, end: at(r_end), hits }
        })
        .collect();

    let mut centerout = (f64::INFINITY, None);
    let mut hits = Vec::new();
    for nrm in &normals {
        if nrm.margin < centerout.0 {
            centerout = (nrm.margin, Some(nrm.end));
        }
        hits.extend(nrm.hits.iter().copied());
    }
    let mut centerout = HypothesisEntry::judged(Condition::CENTEROUT, centerout.0, centerout.1, normals.len());
    if !centerout.pass {
        centerout = centerout.note("the closure of omega0 reaches the evolute of Gamma");
    }

    let ny: Vec<(f64, Point)> = hits
        .par_iter()
        .map(|&p| {
            let c = domain.closest(p);
            (outward_normal(&domain.eval(c.t))[1], c.point)
        })
        .collect();
    let nuy = if ny.is_empty() {
        HypothesisEntry::judged(Condition::NUY, 0.0, None, 0).note("no boundary point of omega0 with r > 0")
    } else {
        let vals: Vec<f64> = ny.iter().map(|v| v.0).collect();
        let (k, m) = argmin(&vals);
        HypothesisEntry::judged(Condition::NUY, m, Some(ny[k].1), ny.len())
    };
    Sweep { nuy, centerout }
}
