//! Localized bump initial data and its admissibility checks.

use std::sync::Arc;

use curvegeom::{map_unchecked, FlowRegion, GeomError, PlanarDomain, Point};
use pdesolve::ops::Stencil;
use pdesolve::{glue, Grid, GridField, ScalarField, SolveError};
use serde::Serialize;

pub mod cli;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InitError {
    #[error("invalid bump: {0}")]
    InvalidSpec(String),
    #[error("grid spacing h = {h} does not resolve eps (need h <= {need})")]
    GridTooCoarse { h: f64, need: f64 },
    #[error("ball B(x0 + eps nu, eps) leaves the domain: clearance {clearance} < eps = {eps}")]
    BallNotInside { clearance: f64, eps: f64 },
    #[error("base point ({x}, {y}) is {distance:e} away from the boundary")]
    BaseOffBoundary { x: f64, y: f64, distance: f64 },
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Profile `φ`: 1 on `[0,1]`, 0 on `[3/2, ∞)`, smooth and nonincreasing.
pub fn phi(t: f64) -> f64 {
    glue((t - 1.0) / 0.5)
}

/// `φ′`, in closed form.
pub fn phi_prime(t: f64) -> f64 {
    let x = (t - 1.0) / 0.5;
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    // glue = f(1−x)/(f(1−x)+f(x)), f = exp(−1/·); with a = 1/(1−x)², b = 1/x²
    // the derivative is −g(1−g)(a + b).
    let g = glue(x);
    -g * (1.0 - g) * (1.0 / ((1.0 - x) * (1.0 - x)) + 1.0 / (x * x)) / 0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BumpSpec {
    /// `x₀ ∈ ∂Ω`.
    pub base: Point,
    pub rho: f64,
    pub eps: f64,
    pub c1: f64,
    pub c2: f64,
    pub p: f64,
}

impl BumpSpec {
    /// Bump at the origin with `C₁ = 0`.
    pub fn at_origin(eps: f64, rho: f64, amplitude: f64, p: f64) -> Self {
        BumpSpec { base: [0.0, 0.0], rho, eps, c1: 0.0, c2: amplitude, p }
    }

    /// `k = (p−2)/(p−1)`.
    pub fn k(&self) -> f64 {
        (self.p - 2.0) / (self.p - 1.0)
    }

    /// `C₁ε^k`.
    pub fn inf_threshold(&self) -> f64 {
        self.c1 * self.eps.powf(self.k())
    }

    pub fn check(&self) -> Result<(), InitError> {
        let bad = |m: String| Err(InitError::InvalidSpec(m));
        if !(self.p > 2.0) {
            return bad(format!("p = {} must exceed 2", self.p));
        }
        if !(self.rho > 0.0 && self.eps > 0.0 && self.eps < 0.25 * self.rho) {
            return bad(format!("need 0 < eps < rho/4, got eps = {}, rho = {}", self.eps, self.rho));
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0) {
            return bad(format!("amplitudes must be nonnegative, got C1 = {}, C2 = {}", self.c1, self.c2));
        }
        if self.c2 > 0.0 && !(self.inf_threshold() < self.c2) {
            return bad(format!("C1 eps^k = {} must stay below C2 = {}", self.inf_threshold(), self.c2));
        }
        Ok(())
    }
}

/// The bump in closed form: `C₂φ(|X − c|/(ε/2))` with `c = x₀ + εν(x₀)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bump {
    pub spec: BumpSpec,
    pub center: Point,
}

impl Bump {
    /// Checks the spec and that `B(c, ε)` lies in `Ω`.
    pub fn new(spec: BumpSpec, domain: &PlanarDomain) -> Result<Self, InitError> {
        spec.check()?;
        let cl = domain.closest(spec.base);
        let distance = (cl.point[0] - spec.base[0]).hypot(cl.point[1] - spec.base[1]);
        if distance > 1e-9 {
            return Err(InitError::BaseOffBoundary { x: spec.base[0], y: spec.base[1], distance });
        }
        let nu = if spec.base[0] == 0.0 {
            // Axis points of a symmetric domain have a vertical normal.
            let inward_up = domain.contains([0.0, spec.base[1] + 1e-6]);
            [0.0, if inward_up { 1.0 } else { -1.0 }]
        } else {
            let t = domain.eval(cl.t).tangent();
            [-t[1], t[0]]
        };
        let center = [spec.base[0] + spec.eps * nu[0], spec.base[1] + spec.eps * nu[1]];
        let clearance = domain.signed_distance(center);
        if clearance < spec.eps * (1.0 - 1e-9) {
            return Err(InitError::BallNotInside { clearance, eps: spec.eps });
        }
        Ok(Bump { spec, center })
    }

    fn radial(&self, p: Point) -> (f64, Point) {
        let d = [p[0] - self.center[0], p[1] - self.center[1]];
        (d[0].hypot(d[1]), d)
    }

    pub fn eval(&self, p: Point) -> f64 {
        let (r, _) = self.radial(p);
        self.spec.c2 * phi(r / (0.5 * self.spec.eps))
    }

    pub fn grad(&self, p: Point) -> [f64; 2] {
        let (r, d) = self.radial(p);
        let w = 0.5 * self.spec.eps;
        let dphi = phi_prime(r / w);
        if dphi == 0.0 || r == 0.0 {
            return [0.0, 0.0];
        }
        let f = self.spec.c2 * dphi / (w * r);
        [f * d[0], f * d[1]]
    }

    /// Outer radius of the support, `3ε/4`.
    pub fn support_radius(&self) -> f64 {
        0.75 * self.spec.eps
    }
}

impl ScalarField for Bump {
    fn value(&self, p: Point) -> Option<f64> {
        Some(self.eval(p))
    }
    fn gradient(&self, p: Point) -> Option<[f64; 2]> {
        Some(self.grad(p))
    }
}

/// Nodal values of the bump on `grid`.
pub fn make_bump(spec: BumpSpec, domain: &PlanarDomain, grid: Arc<Grid>) -> Result<GridField, InitError> {
    let bump = Bump::new(spec, domain)?;
    let need = spec.eps / 8.0;
    if grid.h() > need * (1.0 + 1e-12) {
        return Err(InitError::GridTooCoarse { h: grid.h(), need });
    }
    Ok(GridField::from_fn(grid, |p| bump.eval(p)))
}

/// One checked condition of the initial data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub pass: bool,
    /// Worst observed value of the quantity being bounded.
    pub value: f64,
    pub bound: f64,
    pub witness: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn at_most(value: f64, bound: f64, witness: Option<Point>) -> Self {
        Check { pass: value <= bound, value, bound, witness, note: None }
    }
    fn at_least(value: f64, bound: f64, witness: Option<Point>) -> Self {
        Check { pass: value >= bound, value, bound, witness, note: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Validation {
    /// `max |X − x₀|` over the support, against `ρ/2`.
    pub support: Check,
    /// `‖u₀‖∞` against `C₂`.
    pub sup: Check,
    /// `inf u₀` over `B(c, ε/2)` against `C₁ε^k`.
    pub inf: Check,
    /// Largest mirror-pair defect, against 0.
    pub symmetry: Check,
    /// Largest discrete `u₀,x` on `{x > 0}`.
    pub monotone_x: Check,
    /// Worst `−u₀,s` on the sampled `ω₀`.
    pub us_sign: Check,
}

impl Validation {
    pub fn pass(&self) -> bool {
        [&self.support, &self.sup, &self.inf, &self.symmetry, &self.monotone_x, &self.us_sign].iter().all(|c| c.pass)
    }
}

/// Tolerances of [`validate_u0`].
pub const MONOTONE_TOL: f64 = 1e-12;

/// Checks the admissibility conditions on the nodal data `u0`; `us_tol` is
/// the allowed positive part of `u₀,s` on the sampled `ω₀`.
pub fn validate_u0(
    u0: &GridField,
    spec: &BumpSpec,
    domain: &PlanarDomain,
    region: &FlowRegion,
    us_tol: f64,
) -> Validation {
    let g = &u0.grid;
    let x0 = spec.base;
    let dist = |p: Point| (p[0] - x0[0]).hypot(p[1] - x0[1]);
    let mut supp = (f64::NEG_INFINITY, None);
    let mut sup = (0.0, None);
    let mut outside_support = None;
    for k in 0..g.len() {
        let v = u0.values[k];
        let p = g.point(k);
        if v != 0.0 {
            if !g.kind(k).is_inside() {
                outside_support = Some(p);
            }
            if dist(p) > supp.0 {
                supp = (dist(p), Some(p));
            }
        }
        if sup.1.is_none() || v > sup.0 {
            sup = (v, Some(p));
        }
    }
    let mut support = Check::at_most(supp.0.max(0.0), 0.5 * spec.rho, supp.1);
    if let Some(p) = outside_support {
        support.pass = false;
        support.witness = Some(p);
        support.note = Some("nonzero value at an exterior node".into());
    }
    let sup = Check::at_most(sup.0, spec.c2, sup.1);

    let bump = Bump::new(*spec, domain).ok();
    let inf = match bump {
        Some(b) => {
            let mut worst = (f64::INFINITY, None);
            for k in g.inside_nodes() {
                let p = g.point(k);
                if (p[0] - b.center[0]).hypot(p[1] - b.center[1]) <= 0.5 * spec.eps && u0.values[k] < worst.0 {
                    worst = (u0.values[k], Some(p));
                }
            }
            let mut c = Check::at_least(worst.0, spec.inf_threshold(), worst.1);
            if worst.1.is_none() {
                c.pass = false;
                c.note = Some("no node in B(c, eps/2)".into());
            }
            c
        }
        None => Check {
            pass: false,
            value: f64::NAN,
            bound: spec.inf_threshold(),
            witness: None,
            note: Some("bump centre undefined for this base point".into()),
        },
    };

    let (defect, pair) = mirror_worst(u0);
    let symmetry = Check::at_most(defect, 0.0, pair);

    let mut mono = (f64::NEG_INFINITY, None);
    for k in g.inside_nodes() {
        let p = g.point(k);
        if p[0] > 0.0 {
            let gx = Stencil::gather(g, &u0.values, k, None).gradient()[0];
            if gx > mono.0 {
                mono = (gx, Some(p));
            }
        }
    }
    let monotone_x = Check::at_most(mono.0, MONOTONE_TOL, mono.1);

    let us = check_us_sign_at_t0(u0, domain, region, US_SAMPLES);
    let mut us_sign = Check::at_least(us.margin, -us_tol, us.witness);
    us_sign.note = Some(format!("{} samples", us.samples));
    Validation { support, sup, inf, symmetry, monotone_x, us_sign }
}

fn mirror_worst(u: &GridField) -> (f64, Option<Point>) {
    let g = &u.grid;
    let Some(c) = g.center_col() else { return (0.0, None) };
    let mut worst = (0.0, None);
    for j in 0..g.ny() {
        for i in 0..c {
            let a = g.index(i, j);
            let d = (u.values[a] - u.values[g.index(2 * c - i, j)]).abs();
            if d > worst.0 {
                worst = (d, Some(g.point(a)));
            }
        }
    }
    worst
}

/// Sample points `(r, s, M(r,s))` of `ω₀ = Ω ∩ D_Γ ∩ {y < y0}`: `n` values
/// of `s` in `[s_lo, s0]` and `n` of `r` in `[r_min, rmax(s))`.
pub fn omega0_samples(region: &FlowRegion, domain: &PlanarDomain, n: usize, r_min: f64) -> Vec<(f64, f64, Point)> {
    let n = n.max(2);
    let (s_lo, s0) = (region.s_lo, region.s0());
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let s = s_lo + (s0 - s_lo) * i as f64 / (n - 1) as f64;
        let rmax = region.rmax(s).min(4.0 * diag(domain));
        if !(rmax > r_min) {
            continue;
        }
        for j in 0..n {
            let r = r_min + (rmax - r_min) * j as f64 / n as f64;
            let p = map_unchecked(&region.chart, r, s);
            if r > 0.0 && domain.contains(p) {
                out.push((r, s, p));
            }
        }
    }
    out
}

fn diag(domain: &PlanarDomain) -> f64 {
    let b = domain.bbox();
    (b[2] - b[0]).hypot(b[3] - b[1])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UsSign {
    /// `min (−u₀,s)`; 0 with no samples.
    pub margin: f64,
    pub witness: Option<Point>,
    pub witness_rs: Option<(f64, f64)>,
    pub samples: usize,
}

/// Default side of the `(r, s)` sample of `ω₀`.
pub const US_SAMPLES: usize = 40;

/// `min (−u_s)` with `u_s = (1−rK)(α′u_x + β′u_y)` on an `n × n` sample of
/// `ω₀`. Grid fields supply interpolated finite-difference partials.
pub fn check_us_sign_at_t0<F: ScalarField + ?Sized>(
    u0: &F,
    domain: &PlanarDomain,
    region: &FlowRegion,
    n: usize,
) -> UsSign {
    let pts =
        omega0_samples(region, domain, n, 0.0).into_iter().filter_map(|(r, s, p)| Some((r, s, p, u0.gradient(p)?)));
    worst_us(region, pts)
}

fn worst_us(region: &FlowRegion, pts: impl Iterator<Item = (f64, f64, Point, [f64; 2])>) -> UsSign {
    let mut out = UsSign { margin: 0.0, witness: None, witness_rs: None, samples: 0 };
    let mut best = f64::INFINITY;
    for (r, s, p, gr) in pts {
        let f = region.chart.frame(s);
        let us = (1.0 - r * f.k) * (f.t[0] * gr[0] + f.t[1] * gr[1]);
        out.samples += 1;
        if -us < best {
            best = -us;
            out.witness = Some(p);
            out.witness_rs = Some((r, s));
        }
    }
    if out.samples > 0 {
        out.margin = best;
    }
    out
}
