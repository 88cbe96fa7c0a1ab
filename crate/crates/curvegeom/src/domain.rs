//! Analytic boundary descriptions for planar domains symmetric in `x`.
//!
//! Every domain is described by its right half: a curve `c(t)`, `t ∈ [0, t_max]`,
//! starting at the origin with tangent `(1,0)` and ending on the `y` axis with
//! tangent `(-1,0)`. The left half is the mirror image, so the closed boundary is
//! traversed counterclockwise for `t ∈ [-t_max, t_max]` and the interior lies on
//! the left (the side of the inward normal).

use serde::{Deserialize, Serialize};

use crate::GeomError;

pub type Point = [f64; 2];

/// Tolerance on tangent continuity at arc junctions, radians.
pub const JUNCTION_TOL: f64 = 1e-8;

const POLY_PER_HALF: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DomainSpec {
    /// Semi-axes `a` (horizontal) and `b`; lower co-vertex at the origin.
    Ellipse { a: f64, b: f64 },
    /// Disk of the given radius, tangent to `y = 0` at the origin.
    Disk { radius: f64 },
    /// Right half as a chain of circular arcs starting at the origin.
    /// With `close`, the last radius is solved so the chain ends on `x = 0`.
    Arcs {
        arcs: Vec<ArcSpec>,
        #[serde(default)]
        close: bool,
    },
    /// Clamped cubic through control points of the right half, from the
    /// origin to a point on the `y` axis.
    Spline { points: Vec<Point> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    #[serde(default)]
    pub radius: f64,
    /// Turning angle in degrees; negative spans bend away from the interior.
    #[serde(default)]
    pub span_deg: f64,
    /// Straight segment of this length instead of an arc (`span_deg` must be 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    /// Optional explicit center, checked against the chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Point>,
}

impl ArcSpec {
    pub fn arc(radius: f64, span_deg: f64) -> Self {
        ArcSpec { radius, span_deg, center: None, length: None }
    }

    pub fn line(length: f64) -> Self {
        ArcSpec { radius: 0.0, span_deg: 0.0, center: None, length: Some(length) }
    }
}

impl DomainSpec {
    /// Composite-arc domain with slowly increasing curvature near the origin
    /// (radii 5, 4, 3), a tight convex turn, one concave arc and a flat top.
    pub fn figure_one() -> Self {
        let arc = |radius: f64, span_deg: f64| ArcSpec::arc(radius, span_deg);
        DomainSpec::Arcs {
            arcs: vec![
                arc(5.0, 10.0),
                arc(4.0, 10.0),
                arc(3.0, 10.0),
                arc(0.7, 90.0),
                arc(0.5, -70.0),
                arc(0.5, 105.0),
                arc(3.0, 15.0),
                arc(8.0, 10.0),
            ],
            close: true,
        }
    }

    /// Half-stadium with a flat bottom of half-width `w` and a unit semicircle cap.
    pub fn stadium(w: f64) -> Self {
        DomainSpec::Arcs { arcs: vec![ArcSpec::line(w), ArcSpec::arc(1.0, 180.0), ArcSpec::line(w)], close: false }
    }

    pub fn from_json(text: &str) -> Result<Self, GeomError> {
        serde_json::from_str(text).map_err(|e| GeomError::InvalidDomain(e.to_string()))
    }

    /// Named domains: `ellipse` (a = 2, b = 1), `disk` (unit), `figure1`, `stadium`.
    pub fn preset(name: &str) -> Result<Self, GeomError> {
        match name {
            "ellipse" => Ok(DomainSpec::Ellipse { a: 2.0, b: 1.0 }),
            "disk" => Ok(DomainSpec::Disk { radius: 1.0 }),
            "figure1" | "figure-one" | "arcs" => Ok(DomainSpec::figure_one()),
            "stadium" => Ok(DomainSpec::stadium(0.5)),
            other => Err(GeomError::InvalidDomain(format!("unknown preset {other:?}"))),
        }
    }

    /// A preset name, a path to a JSON file, or inline JSON.
    pub fn resolve(arg: &str) -> Result<Self, GeomError> {
        if arg.trim_start().starts_with('{') {
            return DomainSpec::from_json(arg);
        }
        if let Ok(spec) = DomainSpec::preset(arg) {
            return Ok(spec);
        }
        let text = std::fs::read_to_string(arg).map_err(|e| GeomError::InvalidDomain(format!("{arg}: {e}")))?;
        DomainSpec::from_json(&text)
    }
}

/// Value and first three parameter derivatives of a curve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CurveJet {
    pub p: Point,
    pub d1: Point,
    pub d2: Point,
    pub d3: Point,
}

impl CurveJet {
    fn mirrored(self) -> Self {
        // c(-t) with the x component negated.
        CurveJet {
            p: [-self.p[0], self.p[1]],
            d1: [self.d1[0], -self.d1[1]],
            d2: [-self.d2[0], self.d2[1]],
            d3: [self.d3[0], -self.d3[1]],
        }
    }

    pub fn speed(&self) -> f64 {
        norm(self.d1)
    }

    /// Unit tangent.
    pub fn tangent(&self) -> Point {
        let v = self.speed();
        [self.d1[0] / v, self.d1[1] / v]
    }

    /// Signed curvature, positive when the curve turns toward the interior.
    pub fn curvature(&self) -> f64 {
        cross(self.d1, self.d2) / self.speed().powi(3)
    }

    /// Derivative of the curvature with respect to arclength.
    pub fn curvature_prime(&self) -> f64 {
        let v2 = dot(self.d1, self.d1);
        let v = v2.sqrt();
        let dk_dt =
            (cross(self.d1, self.d3) * v2 - 3.0 * cross(self.d1, self.d2) * dot(self.d1, self.d2)) / (v2 * v2 * v);
        dk_dt / v
    }
}

#[derive(Clone, Debug)]
struct ArcPiece {
    /// For a straight piece: the start point, with `radius` infinite.
    center: Point,
    radius: f64,
    sign: f64,
    phi0: f64,
    t0: f64,
    len: f64,
    start: Point,
}

impl ArcPiece {
    fn eval(&self, t: f64) -> CurveJet {
        let u = t - self.t0;
        if u == 0.0 {
            // Exact junction points (the chain starts at the exact origin).
            let mut j = self.eval_offset(u);
            j.p = self.start;
            return j;
        }
        self.eval_offset(u)
    }

    fn eval_offset(&self, u: f64) -> CurveJet {
        if self.radius.is_infinite() {
            let (sn, cs) = self.phi0.sin_cos();
            return CurveJet {
                p: [self.center[0] + u * cs, self.center[1] + u * sn],
                d1: [cs, sn],
                ..CurveJet::default()
            };
        }
        let phi = self.phi0 + self.sign * u / self.radius;
        let (sn, cs) = phi.sin_cos();
        let r = self.radius;
        CurveJet {
            p: [self.center[0] + r * cs, self.center[1] + r * sn],
            d1: [-self.sign * sn, self.sign * cs],
            d2: [-cs / r, -sn / r],
            d3: [self.sign * sn / (r * r), -self.sign * cs / (r * r)],
        }
    }
}

#[derive(Clone, Debug)]
struct SplinePiece {
    t0: f64,
    // Per coordinate: value, slope, half second derivative, cubic coefficient.
    c: [[f64; 4]; 2],
}

impl SplinePiece {
    fn eval(&self, t: f64) -> CurveJet {
        let u = t - self.t0;
        let mut jet = CurveJet::default();
        for k in 0..2 {
            let [a0, a1, a2, a3] = self.c[k];
            jet.p[k] = a0 + u * (a1 + u * (a2 + u * a3));
            jet.d1[k] = a1 + u * (2.0 * a2 + 3.0 * u * a3);
            jet.d2[k] = 2.0 * a2 + 6.0 * u * a3;
            jet.d3[k] = 6.0 * a3;
        }
        jet
    }
}

#[derive(Clone, Debug)]
enum HalfCurve {
    Ellipse { a: f64, b: f64 },
    Arcs(Vec<ArcPiece>),
    Spline(Vec<SplinePiece>, f64),
}

impl HalfCurve {
    fn t_max(&self) -> f64 {
        match self {
            HalfCurve::Ellipse { .. } => std::f64::consts::PI,
            HalfCurve::Arcs(pieces) => {
                let last = pieces.last().expect("nonempty arc chain");
                last.t0 + last.len
            }
            HalfCurve::Spline(_, t_end) => *t_end,
        }
    }

    fn breaks(&self) -> Vec<f64> {
        match self {
            HalfCurve::Ellipse { .. } => Vec::new(),
            HalfCurve::Arcs(pieces) => pieces.iter().skip(1).map(|p| p.t0).collect(),
            HalfCurve::Spline(pieces, _) => pieces.iter().skip(1).map(|p| p.t0).collect(),
        }
    }

    /// At a break, the jet of the piece ending there.
    fn eval_left(&self, t: f64) -> CurveJet {
        match self {
            HalfCurve::Ellipse { .. } => self.eval(t),
            HalfCurve::Arcs(pieces) => {
                let idx = pieces.partition_point(|p| p.t0 < t).saturating_sub(1);
                pieces[idx].eval(t)
            }
            HalfCurve::Spline(pieces, _) => {
                let idx = pieces.partition_point(|p| p.t0 < t).saturating_sub(1);
                pieces[idx].eval(t)
            }
        }
    }

    fn eval(&self, t: f64) -> CurveJet {
        match self {
            HalfCurve::Ellipse { a, b } => {
                let (sn, cs) = t.sin_cos();
                CurveJet {
                    p: [a * sn, b - b * cs],
                    d1: [a * cs, b * sn],
                    d2: [-a * sn, b * cs],
                    d3: [-a * cs, -b * sn],
                }
            }
            HalfCurve::Arcs(pieces) => {
                let idx = pieces.partition_point(|p| p.t0 <= t).saturating_sub(1);
                pieces[idx].eval(t)
            }
            HalfCurve::Spline(pieces, _) => {
                let idx = pieces.partition_point(|p| p.t0 <= t).saturating_sub(1);
                pieces[idx].eval(t)
            }
        }
    }
}

fn build_arcs(arcs: &[ArcSpec], close: bool) -> Result<HalfCurve, GeomError> {
    if arcs.is_empty() {
        return Err(GeomError::InvalidDomain("empty arc list".into()));
    }
    let mut p: Point = [0.0, 0.0];
    let mut tan: Point = [1.0, 0.0];
    let mut t0 = 0.0;
    let mut pieces = Vec::with_capacity(arcs.len());
    let last = arcs.len() - 1;
    for (i, spec) in arcs.iter().enumerate() {
        if let Some(len) = spec.length {
            if !(len > 0.0) || !len.is_finite() || spec.span_deg != 0.0 || spec.center.is_some() {
                return Err(GeomError::InvalidDomain(format!("segment {i} needs a positive length and no span")));
            }
            let piece =
                ArcPiece { center: p, radius: f64::INFINITY, sign: 1.0, phi0: tan[1].atan2(tan[0]), t0, len, start: p };
            p = piece.eval(t0 + len).p;
            t0 += len;
            pieces.push(piece);
            continue;
        }
        if spec.span_deg == 0.0 || !spec.span_deg.is_finite() {
            return Err(GeomError::InvalidDomain(format!("arc {i} has zero span")));
        }
        let sign = spec.span_deg.signum();
        let span = spec.span_deg.abs().to_radians();
        let n = [-tan[1], tan[0]];
        let radial_dir = [-sign * n[0], -sign * n[1]];
        let phi0 = radial_dir[1].atan2(radial_dir[0]);
        let phi_end = phi0 + sign * span;
        let mut radius = spec.radius;
        if close && i == last {
            let denom = sign * n[0] + phi_end.cos();
            if denom.abs() < 1e-14 {
                return Err(GeomError::InvalidDomain("closing arc cannot reach x = 0".into()));
            }
            radius = -p[0] / denom;
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeomError::InvalidDomain(format!("arc {i} has radius {radius}")));
        }
        let center = [p[0] + sign * radius * n[0], p[1] + sign * radius * n[1]];
        if let Some(given) = spec.center {
            let rv = [p[0] - given[0], p[1] - given[1]];
            let dist = norm(rv);
            if (dist - radius).abs() > JUNCTION_TOL * radius.max(1.0) {
                return Err(GeomError::ArcRadius { index: i, mismatch: dist - radius });
            }
            let implied = [-sign * rv[1] / dist, sign * rv[0] / dist];
            let jump = cross(tan, implied).atan2(dot(tan, implied)).abs();
            if jump > JUNCTION_TOL {
                return Err(GeomError::JunctionTangent { index: i, jump });
            }
        }
        let len = radius * span;
        let piece = ArcPiece { center, radius, sign, phi0, t0, len, start: p };
        let end = piece.eval(t0 + len);
        p = end.p;
        tan = end.d1;
        t0 += len;
        pieces.push(piece);
    }
    if p[0].abs() > JUNCTION_TOL {
        return Err(GeomError::Closure { gap: p[0] });
    }
    let jump = cross(tan, [-1.0, 0.0]).atan2(dot(tan, [-1.0, 0.0])).abs();
    if jump > JUNCTION_TOL {
        return Err(GeomError::JunctionTangent { index: arcs.len(), jump });
    }
    Ok(HalfCurve::Arcs(pieces))
}

fn build_spline(points: &[Point]) -> Result<HalfCurve, GeomError> {
    let n = points.len();
    if n < 3 {
        return Err(GeomError::InvalidDomain("spline needs at least three points".into()));
    }
    if points[0] != [0.0, 0.0] {
        return Err(GeomError::InvalidDomain("spline must start at the origin".into()));
    }
    if points[n - 1][0] != 0.0 || !(points[n - 1][1] > 0.0) {
        return Err(GeomError::InvalidDomain("spline must end on the positive y axis".into()));
    }
    if points[1..n - 1].iter().any(|q| !(q[0] > 0.0)) {
        return Err(GeomError::InvalidDomain("interior spline points need x > 0".into()));
    }
    let mut knots = vec![0.0; n];
    for k in 1..n {
        let d = norm([points[k][0] - points[k - 1][0], points[k][1] - points[k - 1][1]]);
        if d <= 0.0 {
            return Err(GeomError::InvalidDomain(format!("repeated spline point {k}")));
        }
        knots[k] = knots[k - 1] + d;
    }
    let slopes: [[f64; 2]; 2] = [[1.0, -1.0], [0.0, 0.0]];
    let mut coeffs = vec![[[0.0; 4]; 2]; n - 1];
    for comp in 0..2 {
        let y: Vec<f64> = points.iter().map(|q| q[comp]).collect();
        let m = clamped_second_derivatives(&knots, &y, slopes[comp][0], slopes[comp][1]);
        for k in 0..n - 1 {
            let h = knots[k + 1] - knots[k];
            let b = (y[k + 1] - y[k]) / h - h * (2.0 * m[k] + m[k + 1]) / 6.0;
            coeffs[k][comp] = [y[k], b, m[k] / 2.0, (m[k + 1] - m[k]) / (6.0 * h)];
        }
    }
    let pieces = (0..n - 1).map(|k| SplinePiece { t0: knots[k], c: coeffs[k] }).collect();
    Ok(HalfCurve::Spline(pieces, knots[n - 1]))
}

fn clamped_second_derivatives(t: &[f64], y: &[f64], d0: f64, dn: f64) -> Vec<f64> {
    let n = t.len();
    let h: Vec<f64> = (0..n - 1).map(|k| t[k + 1] - t[k]).collect();
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    diag[0] = 2.0 * h[0];
    sup[0] = h[0];
    rhs[0] = 6.0 * ((y[1] - y[0]) / h[0] - d0);
    for k in 1..n - 1 {
        sub[k] = h[k - 1];
        diag[k] = 2.0 * (h[k - 1] + h[k]);
        sup[k] = h[k];
        rhs[k] = 6.0 * ((y[k + 1] - y[k]) / h[k] - (y[k] - y[k - 1]) / h[k - 1]);
    }
    sub[n - 1] = h[n - 2];
    diag[n - 1] = 2.0 * h[n - 2];
    rhs[n - 1] = 6.0 * (dn - (y[n - 1] - y[n - 2]) / h[n - 2]);
    // Thomas algorithm.
    for k in 1..n {
        let w = sub[k] / diag[k - 1];
        diag[k] -= w * sup[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    let mut m = vec![0.0; n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for k in (0..n - 1).rev() {
        m[k] = (rhs[k] - sup[k] * m[k + 1]) / diag[k];
    }
    m
}

/// Closest boundary point of a query point.
#[derive(Clone, Copy, Debug)]
pub struct Closest {
    pub t: f64,
    pub point: Point,
    /// Distance, positive inside the domain.
    pub signed_distance: f64,
}

/// A validated symmetric domain with cached boundary polyline and arclength table.
#[derive(Clone, Debug)]
pub struct PlanarDomain {
    pub spec: DomainSpec,
    half: HalfCurve,
    t_max: f64,
    /// Parameters of the half-curve polyline, including every junction.
    half_t: Vec<f64>,
    /// Cumulative arclength at `half_t`.
    half_s: Vec<f64>,
    /// Full closed polyline, `t` from `-t_max` to `t_max` (first and last coincide).
    loop_t: Vec<f64>,
    loop_p: Vec<Point>,
    bbox: [f64; 4],
}

impl PlanarDomain {
    pub fn new(spec: DomainSpec) -> Result<Self, GeomError> {
        let half = match &spec {
            DomainSpec::Ellipse { a, b } => {
                if !(*a > 0.0 && *b > 0.0) {
                    return Err(GeomError::InvalidDomain("ellipse semi-axes must be positive".into()));
                }
                HalfCurve::Ellipse { a: *a, b: *b }
            }
            DomainSpec::Disk { radius } => {
                if !(*radius > 0.0) {
                    return Err(GeomError::InvalidDomain("disk radius must be positive".into()));
                }
                HalfCurve::Ellipse { a: *radius, b: *radius }
            }
            DomainSpec::Arcs { arcs, close } => build_arcs(arcs, *close)?,
            DomainSpec::Spline { points } => build_spline(points)?,
        };
        let t_max = half.t_max();
        let mut half_t: Vec<f64> = (0..=POLY_PER_HALF).map(|k| t_max * k as f64 / POLY_PER_HALF as f64).collect();
        half_t.extend(half.breaks());
        half_t.sort_by(f64::total_cmp);
        half_t.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * t_max);
        let mut half_s = vec![0.0; half_t.len()];
        for k in 1..half_t.len() {
            half_s[k] = half_s[k - 1] + speed_integral(&half, half_t[k - 1], half_t[k]);
        }
        let mut loop_t: Vec<f64> = half_t.iter().rev().map(|t| -t).collect();
        loop_t.extend(half_t.iter().skip(1).copied());
        let mut dom = PlanarDomain { spec, half, t_max, half_t, half_s, loop_t, loop_p: Vec::new(), bbox: [0.0; 4] };
        dom.loop_p = dom.loop_t.iter().map(|&t| dom.eval(t).p).collect();
        // Close the polyline exactly, or a crossing at the top point can slip
        // between the two sub-ulp images of the axis point.
        let last = dom.loop_p.len() - 1;
        dom.loop_p[0] = dom.loop_p[last];
        let mut bbox = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for q in &dom.loop_p {
            bbox[0] = bbox[0].min(q[0]);
            bbox[1] = bbox[1].min(q[1]);
            bbox[2] = bbox[2].max(q[0]);
            bbox[3] = bbox[3].max(q[1]);
        }
        dom.bbox = bbox;
        Ok(dom)
    }

    /// Parameter of the top point; the right half is `t ∈ [0, t_max]`.
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Half the perimeter.
    pub fn half_length(&self) -> f64 {
        *self.half_s.last().unwrap()
    }

    /// `[xmin, ymin, xmax, ymax]` of the sampled boundary.
    pub fn bbox(&self) -> [f64; 4] {
        self.bbox
    }

    /// Parameters where the right half is only C¹ (arc or spline joints).
    pub fn breaks(&self) -> Vec<f64> {
        self.half.breaks()
    }

    /// One-sided jet of the right half at `t ∈ [0, t_max]`; `left` selects the
    /// piece ending at `t` when `t` is a break.
    pub fn eval_half_one_sided(&self, t: f64, left: bool) -> CurveJet {
        let t = t.clamp(0.0, self.t_max);
        if left {
            self.half.eval_left(t)
        } else {
            self.half.eval(t)
        }
    }

    /// Jet of the closed boundary at `t`, wrapped into `(-t_max, t_max]`.
    pub fn eval(&self, t: f64) -> CurveJet {
        let period = 2.0 * self.t_max;
        let mut t = t;
        if t > self.t_max || t < -self.t_max {
            t -= period * ((t + self.t_max) / period).floor();
        }
        if t >= 0.0 {
            self.half.eval(t.min(self.t_max))
        } else {
            self.half.eval(-t).mirrored()
        }
    }

    /// Arclength from the origin along the right half.
    pub fn s_of_t(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.t_max);
        let k = self.half_t.partition_point(|&v| v <= t).saturating_sub(1);
        self.half_s[k] + speed_integral(&self.half, self.half_t[k], t)
    }

    /// Inverse of [`s_of_t`](Self::s_of_t) on the right half.
    pub fn t_of_s(&self, s: f64) -> f64 {
        let total = self.half_length();
        let s = s.clamp(0.0, total);
        let k = self.half_s.partition_point(|&v| v <= s).saturating_sub(1).min(self.half_t.len() - 2);
        let (ta, tb) = (self.half_t[k], self.half_t[k + 1]);
        let mut t = ta + (s - self.half_s[k]) / self.half.eval(ta).speed();
        for _ in 0..20 {
            t = t.clamp(ta, tb);
            let err = self.half_s[k] + speed_integral(&self.half, ta, t) - s;
            let step = err / self.half.eval(t).speed();
            t -= step;
            if step.abs() < 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        t.clamp(ta, tb)
    }

    /// Closest boundary point with a signed distance (positive inside).
    pub fn closest(&self, q: Point) -> Closest {
        let n = self.loop_p.len();
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, v) in self.loop_p.iter().enumerate() {
            let d = (v[0] - q[0]).powi(2) + (v[1] - q[1]).powi(2);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        let lo = if best == 0 { self.loop_t[n - 2] - 2.0 * self.t_max } else { self.loop_t[best - 1] };
        let hi = if best == n - 1 { self.loop_t[1] + 2.0 * self.t_max } else { self.loop_t[best + 1] };
        let mut t = self.loop_t[best];
        let mut best_t = t;
        for _ in 0..40 {
            let j = self.eval(t);
            let dv = [j.p[0] - q[0], j.p[1] - q[1]];
            let g = dot(dv, j.d1);
            let gp = dot(j.d1, j.d1) + dot(dv, j.d2);
            let next = if gp > 0.0 { t - g / gp } else { t - g.signum() * 0.25 * (hi - lo) };
            let next = next.clamp(lo, hi);
            if (next - t).abs() < 1e-15 * (1.0 + t.abs()) {
                t = next;
                break;
            }
            t = next;
        }
        let dist2 = |t: f64| {
            let p = self.eval(t).p;
            (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
        };
        if dist2(t) < dist2(best_t) {
            best_t = t;
        }
        let j = self.eval(best_t);
        let dv = [q[0] - j.p[0], q[1] - j.p[1]];
        let d = norm(dv);
        let inward = [-j.d1[1], j.d1[0]];
        let sign = if dot(dv, inward) >= 0.0 { 1.0 } else { -1.0 };
        let mut t_wrapped = best_t;
        if t_wrapped > self.t_max {
            t_wrapped -= 2.0 * self.t_max;
        } else if t_wrapped <= -self.t_max {
            t_wrapped += 2.0 * self.t_max;
        }
        Closest { t: t_wrapped, point: j.p, signed_distance: sign * d }
    }

    pub fn signed_distance(&self, q: Point) -> f64 {
        self.closest(q).signed_distance
    }

    /// Strict interior test.
    pub fn contains(&self, q: Point) -> bool {
        self.signed_distance(q) > 0.0
    }

    /// Interior test relaxed by `tol` (points within `tol` outside still count).
    pub fn contains_tol(&self, q: Point, tol: f64) -> bool {
        self.signed_distance(q) >= -tol
    }

    /// Parameters `λ` of all boundary crossings of the line `a + λ(b - a)`,
    /// restricted to `λ ∈ [lam_min, lam_max]`, sorted.
    pub fn line_crossings(&self, a: Point, b: Point, lam_min: f64, lam_max: f64) -> Vec<f64> {
        let dir = [b[0] - a[0], b[1] - a[1]];
        let len2 = dot(dir, dir);
        let f = |p: Point| cross(dir, [p[0] - a[0], p[1] - a[1]]);
        let mut out = Vec::new();
        let mut prev = f(self.loop_p[0]) >= 0.0;
        for k in 0..self.loop_p.len() - 1 {
            let next = f(self.loop_p[k + 1]) >= 0.0;
            if prev != next {
                let pa = self.loop_p[k];
                let pb = self.loop_p[k + 1];
                let la = dot([pa[0] - a[0], pa[1] - a[1]], dir) / len2;
                let lb = dot([pb[0] - a[0], pb[1] - a[1]], dir) / len2;
                let pad = 1e-6 * (lam_max - lam_min).abs().max(1.0);
                if la.max(lb) >= lam_min - pad && la.min(lb) <= lam_max + pad {
                    let t = self.refine_root(self.loop_t[k], self.loop_t[k + 1], |j| f(j.p), |j| cross(dir, j.d1));
                    let p = self.eval(t).p;
                    let lam = dot([p[0] - a[0], p[1] - a[1]], dir) / len2;
                    if lam >= lam_min && lam <= lam_max {
                        out.push(lam);
                    }
                }
            }
            prev = next;
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Sorted `x` coordinates where the boundary crosses the horizontal line at `y`.
    pub fn horizontal_crossings(&self, y: f64) -> Vec<f64> {
        let x0 = self.bbox[0] - 1.0;
        let x1 = self.bbox[2] + 1.0;
        self.line_crossings([x0, y], [x1, y], 0.0, 1.0).into_iter().map(|l| x0 + l * (x1 - x0)).collect()
    }

    /// Sorted `y` coordinates where the boundary crosses the vertical line at `x`.
    pub fn vertical_crossings(&self, x: f64) -> Vec<f64> {
        let y0 = self.bbox[1] - 1.0;
        let y1 = self.bbox[3] + 1.0;
        self.line_crossings([x, y0], [x, y1], 0.0, 1.0).into_iter().map(|l| y0 + l * (y1 - y0)).collect()
    }

    /// Distance along the ray `a + λ d` (unit `d`) to the first boundary crossing.
    pub fn ray_exit(&self, a: Point, d: Point, lam_max: f64) -> Option<f64> {
        let b = [a[0] + d[0], a[1] + d[1]];
        self.line_crossings(a, b, 1e-14, lam_max).first().copied()
    }

    fn refine_root<F, G>(&self, mut lo: f64, mut hi: f64, f: F, fp: G) -> f64
    where
        F: Fn(&CurveJet) -> f64,
        G: Fn(&CurveJet) -> f64,
    {
        let flo = f(&self.eval(lo));
        let fhi = f(&self.eval(hi));
        let positive_lo = flo >= 0.0;
        if positive_lo == (fhi >= 0.0) {
            // Bracketed only by the polyline (a crossing at an end node).
            return if flo.abs() <= fhi.abs() { lo } else { hi };
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..80 {
            let j = self.eval(t);
            let ft = f(&j);
            if ft == 0.0 {
                return t;
            }
            if (ft >= 0.0) == positive_lo {
                lo = t;
            } else {
                hi = t;
            }
            let d = fp(&j);
            let newton = if d != 0.0 { t - ft / d } else { f64::NAN };
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (next - t).abs() < 1e-16 * (1.0 + t.abs()) || hi - lo < 1e-16 * (1.0 + t.abs()) {
                return next;
            }
            t = next;
        }
        t
    }

    /// `n` boundary points of the right half, uniform in arclength, with `t`.
    pub fn sample_right_half(&self, n: usize) -> Vec<(f64, CurveJet)> {
        let total = self.half_length();
        (0..n)
            .map(|k| {
                let s = total * k as f64 / (n - 1).max(1) as f64;
                let t = self.t_of_s(s);
                (t, self.eval(t))
            })
            .collect()
    }
}

fn speed_integral(half: &HalfCurve, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    match half {
        HalfCurve::Arcs(_) => b - a,
        _ => {
            let scale = half.eval(0.5 * (a + b)).speed() * (b - a);
            quadrature::integrate(|t| half.eval(t).speed(), a, b, 1e-12 * scale).integral
        }
    }
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_half_length_matches_series() {
        let dom = PlanarDomain::new(DomainSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        // Half perimeter of the (2,1) ellipse.
        assert!((dom.half_length() - 4.844_224_110_273_838).abs() < 1e-9);
    }

    #[test]
    fn figure_one_closes() {
        let dom = PlanarDomain::new(DomainSpec::figure_one()).unwrap();
        let top = dom.eval(dom.t_max());
        assert!(top.p[0].abs() < 1e-12);
        assert!((top.tangent()[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn stadium_has_a_flat_bottom() {
        let dom = PlanarDomain::new(DomainSpec::stadium(0.5)).unwrap();
        assert!((dom.half_length() - (1.0 + std::f64::consts::PI)).abs() < 1e-12);
        let j = dom.eval(0.3);
        assert_eq!(j.p, [0.3, 0.0]);
        assert_eq!(j.curvature(), 0.0);
        let top = dom.eval(dom.t_max());
        assert!(top.p[0].abs() < 1e-12 && (top.p[1] - 2.0).abs() < 1e-12);
        let spec = DomainSpec::from_json(
            r#"{"type":"arcs","arcs":[{"length":0.5},{"radius":1,"span_deg":180},{"length":0.5}]}"#,
        )
        .unwrap();
        assert_eq!(spec, DomainSpec::stadium(0.5));
    }

    #[test]
    fn misplaced_center_reports_junction() {
        let spec = DomainSpec::Arcs {
            arcs: vec![
                ArcSpec { radius: 1.0, span_deg: 90.0, center: Some([0.0, 1.0]), length: None },
                ArcSpec { radius: 1.0, span_deg: 90.0, center: Some([0.0, 1.0 + 1e-6]), length: None },
            ],
            close: false,
        };
        match PlanarDomain::new(spec) {
            Err(GeomError::ArcRadius { index, .. }) | Err(GeomError::JunctionTangent { index, .. }) => {
                assert_eq!(index, 1)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unit_disk_distance() {
        let dom = PlanarDomain::new(DomainSpec::Disk { radius: 1.0 }).unwrap();
        let d = dom.signed_distance([0.0, 0.3]);
        assert!((d - 0.3).abs() < 1e-12);
        let d = dom.signed_distance([3.0, 1.0]);
        assert!((d + 2.0).abs() < 1e-12);
        let xs = dom.horizontal_crossings(1.0);
        assert_eq!(xs.len(), 2);
        assert!((xs[0] + 1.0).abs() < 1e-12 && (xs[1] - 1.0).abs() < 1e-12);
    }
}
