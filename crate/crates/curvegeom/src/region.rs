//! The admissible coordinate rectangle `Q_Γ` and the map `M(r,s) = γ(s) + rN(s)`.

use crate::chart::{BoundaryChart, FLAT_CURVATURE};
use crate::domain::{dot, Point};
use crate::GeomError;

pub const INVERT_MAX_ITER: usize = 50;
pub const INVERT_RESIDUAL: f64 = 1e-10;
pub const INVERT_SEEDS: usize = 256;

/// A chart together with the admissible `(r, s)` set.
#[derive(Clone, Debug)]
pub struct FlowRegion {
    pub chart: BoundaryChart,
    /// Optional cap: points of the region stay in `{y ≤ y0}`.
    pub y0: Option<f64>,
    /// Lower end of the `s` range: `0` for `Q_Γ`, `-s0` for the two-sided region.
    pub s_lo: f64,
}

impl FlowRegion {
    /// `Q_Γ` proper, `0 ≤ s ≤ s0`.
    pub fn new(chart: BoundaryChart, y0: Option<f64>) -> Self {
        FlowRegion { chart, y0: y0.filter(|v| v.is_finite()), s_lo: 0.0 }
    }

    /// The mirror-extended region `-s0 ≤ s ≤ s0`.
    pub fn symmetric(chart: BoundaryChart, y0: Option<f64>) -> Self {
        let s_lo = -chart.s0;
        FlowRegion { chart, y0: y0.filter(|v| v.is_finite()), s_lo }
    }

    pub fn s0(&self) -> f64 {
        self.chart.s0
    }

    /// `rmax(s) = min(R(s), cap)`, with the cap where the normal line meets `y = y0`.
    pub fn rmax(&self, s: f64) -> f64 {
        let f = self.chart.frame(s);
        let mut r = f.radius();
        if let Some(y0) = self.y0 {
            if f.gamma[1] >= y0 {
                return 0.0;
            }
            if f.n[1] > 0.0 {
                r = r.min((y0 - f.gamma[1]) / f.n[1]);
            }
        }
        r
    }

    /// Membership in the admissible set.
    pub fn contains(&self, r: f64, s: f64) -> bool {
        s >= self.s_lo && s <= self.s0() && r >= 0.0 && r < self.rmax(s)
    }

    fn check(&self, r: f64, s: f64) -> Result<(), GeomError> {
        if self.contains(r, s) {
            Ok(())
        } else {
            Err(GeomError::RegionViolation { r, s })
        }
    }
}

/// `M(r, s)` without region checks.
pub fn map_unchecked(chart: &BoundaryChart, r: f64, s: f64) -> Point {
    let f = chart.frame(s);
    [f.gamma[0] + r * f.n[0], f.gamma[1] + r * f.n[1]]
}

/// `M(r, s) = γ(s) + rN(s)` for admissible `(r, s)`.
#[allow(non_snake_case)]
pub fn map_M(region: &FlowRegion, r: f64, s: f64) -> Result<Point, GeomError> {
    region.check(r, s)?;
    Ok(map_unchecked(&region.chart, r, s))
}

/// Jacobian determinant of `M`, equal to `K(s) r − 1`.
#[allow(non_snake_case)]
pub fn jacobian_M(region: &FlowRegion, r: f64, s: f64) -> Result<f64, GeomError> {
    region.check(r, s)?;
    Ok(region.chart.curvature(s) * r - 1.0)
}

/// Inverse of `M`.
///
/// The preimage is the foot of a normal through `p`: a zero of
/// `g(s) = (p − γ(s))·T(s)` with `g′ = −(1 − rK) < 0`. Downward sign changes of
/// `g` are located on a coarse scan, refined by safeguarded Newton and polished
/// in two dimensions; the first root landing in the region is returned.
#[allow(non_snake_case)]
pub fn invert_M(region: &FlowRegion, p: Point) -> Result<(f64, f64), GeomError> {
    let chart = &region.chart;
    let s0 = chart.s0;
    let outside = || GeomError::OutsideRegion { x: p[0], y: p[1] };
    let (lo, hi) = (region.s_lo, s0);
    let g = |s: f64| {
        let f = chart.frame(s);
        dot([p[0] - f.gamma[0], p[1] - f.gamma[1]], f.t)
    };
    let grid: Vec<f64> = (0..INVERT_SEEDS).map(|k| lo + (hi - lo) * k as f64 / (INVERT_SEEDS - 1) as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&s| g(s)).collect();
    // Points on the end normals may evaluate to a tiny wrong-signed g.
    let end_tol = 1e-12 * (1.0 + p[0].abs() + p[1].abs());
    let last = INVERT_SEEDS - 1;
    for k in 0..last {
        let lo_ok = vals[k] >= if k == 0 { -end_tol } else { 0.0 };
        let hi_ok = vals[k + 1] < if k + 1 == last { end_tol } else { 0.0 };
        if !(lo_ok && hi_ok) {
            continue;
        }
        let (mut a, mut b) = (grid[k], grid[k + 1]);
        let mut s = if vals[k] == 0.0 { a } else { 0.5 * (a + b) };
        for _ in 0..INVERT_MAX_ITER {
            let f = chart.frame(s);
            let d = [p[0] - f.gamma[0], p[1] - f.gamma[1]];
            let gs = dot(d, f.t);
            if gs == 0.0 {
                break;
            }
            if gs > 0.0 {
                a = s;
            } else {
                b = s;
            }
            let slope = -(1.0 - dot(d, f.n) * f.k);
            let newton = if slope < 0.0 { s - gs / slope } else { f64::NAN };
            let next = if newton >= a && newton <= b { newton } else { 0.5 * (a + b) };
            let done = (next - s).abs() < 1e-16 * (1.0 + s.abs());
            s = next;
            if done || b - a < 1e-16 {
                break;
            }
        }
        let f = chart.frame(s);
        let mut r = dot([p[0] - f.gamma[0], p[1] - f.gamma[1]], f.n);
        for _ in 0..3 {
            let f = chart.frame(s);
            let res = [p[0] - f.gamma[0] - r * f.n[0], p[1] - f.gamma[1] - r * f.n[1]];
            let stretch = 1.0 - r * f.k;
            if stretch <= 0.0 {
                break;
            }
            r += dot(res, f.n);
            s = (s + dot(res, f.t) / stretch).clamp(lo, hi);
        }
        let m = map_unchecked(chart, r, s);
        let residual = (p[0] - m[0]).hypot(p[1] - m[1]);
        if residual >= INVERT_RESIDUAL {
            continue;
        }
        if r < 0.0 && r > -1e-12 {
            r = 0.0;
        }
        if (s - lo).abs() < 1e-12 {
            s = lo;
        } else if (s - hi).abs() < 1e-12 {
            s = hi;
        }
        if region.contains(r, s) {
            return Ok((r, s));
        }
    }
    Err(outside())
}

/// Center of curvature `γ(s) + R(s)N(s)`.
pub fn curvature_center(chart: &BoundaryChart, s: f64) -> Result<Point, GeomError> {
    let f = chart.frame(s);
    if f.k <= FLAT_CURVATURE {
        return Err(GeomError::CenterAtInfinity { s });
    }
    let r = 1.0 / f.k;
    Ok([f.gamma[0] + r * f.n[0], f.gamma[1] + r * f.n[1]])
}
