//! Pointwise diagnostics of a solution snapshot.

use curvegeom::{map_unchecked, BoundaryChart, FlowRegion, PlanarDomain, Point};
use flowcalc::{eval_J, eval_Jbar, flow_from_cartesian, profile_bound, AuxParams};
use pdesolve::{Grid, GridField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::DiagError;

/// Boundary points used for the flux profile.
pub const FLUX_SAMPLES: usize = 513;

// ---------------------------------------------------------------- flux

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FluxProfile {
    pub s: Vec<f64>,
    pub flux: Vec<f64>,
    pub argmax_s: f64,
    pub max: f64,
    pub at_origin: f64,
}

impl FluxProfile {
    /// `max / median`; infinite for a peak over a vanishing median.
    pub fn peak_ratio(&self) -> f64 {
        let mut v = self.flux.clone();
        v.sort_by(f64::total_cmp);
        let med = v[v.len() / 2];
        if med > 0.0 {
            self.max / med
        } else if self.max > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

/// `|∂u/∂ν|` at `n` points of `γ([−s0, s0])`, from the one-sided second
/// order difference `(4u(γ + hν) − u(γ + 2hν))/(2h)` along the inward
/// normal with interpolated values and `u = 0` on the boundary. Ties in the
/// argmax go to the smallest `|s|`, then to the smallest `s`.
pub fn boundary_flux(u: &GridField, chart: &BoundaryChart, n: usize) -> FluxProfile {
    let n = n.max(2);
    let s0 = chart.s0;
    let h = u.grid.h();
    let s: Vec<f64> = (0..n).map(|i| -s0 + 2.0 * s0 * i as f64 / (n - 1) as f64).collect();
    let flux: Vec<f64> = s
        .par_iter()
        .map(|&si| {
            let f = chart.frame(si);
            let at = |c: f64| u.sample([f.gamma[0] + c * h * f.n[0], f.gamma[1] + c * h * f.n[1]]).unwrap_or(0.0);
            ((4.0 * at(1.0) - at(2.0)) / (2.0 * h)).abs()
        })
        .collect();
    let best = flux_argmax(&s, &flux);
    let origin = (0..n).min_by(|&a, &b| s[a].abs().total_cmp(&s[b].abs())).unwrap();
    FluxProfile { argmax_s: s[best], max: flux[best], at_origin: flux[origin], s, flux }
}

/// Index of the largest flux; ties go to the smallest `|s|`, then the smallest `s`.
pub fn flux_argmax(s: &[f64], flux: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..flux.len() {
        let better = flux[i] > flux[best]
            || (flux[i] == flux[best]
                && (s[i].abs() < s[best].abs() || (s[i].abs() == s[best].abs() && s[i] < s[best])));
        if better {
            best = i;
        }
    }
    best
}

// ---------------------------------------------------------------- distance quotients

/// Distance to `∂Ω` at every inside node (0 elsewhere).
#[derive(Clone, Debug)]
pub struct DistanceField {
    pub delta: Vec<f64>,
}

impl DistanceField {
    pub fn new(grid: &Grid, domain: &PlanarDomain) -> Self {
        let delta = (0..grid.len())
            .into_par_iter()
            .map(|k| if grid.kind(k).is_inside() { domain.signed_distance(grid.point(k)).max(0.0) } else { 0.0 })
            .collect();
        DistanceField { delta }
    }
}

/// `max (|∇_h u| − C₂⁰)·δ^{1/(p−1)}` over evolved nodes with `δ ≥ delta_min`;
/// `None` when no node is that deep.
pub fn bernstein_quotient(u: &GridField, dist: &DistanceField, c2_0: f64, p: f64, delta_min: f64) -> Option<f64> {
    let g = &u.grid;
    let e = 1.0 / (p - 1.0);
    g.evolved()
        .par_iter()
        .filter(|&&k| dist.delta[k] >= delta_min)
        .map(|&k| {
            let gr = u.nodal_gradient(k).unwrap();
            (gr[0].hypot(gr[1]) - c2_0) * dist.delta[k].powf(e)
        })
        .reduce_with(f64::max)
}

/// `max u·δ^{−(p−2)/(p−1)}` over evolved nodes in `B(center, radius)`.
pub fn nondeg_quotient(
    u: &GridField,
    dist: &DistanceField,
    center: Point,
    radius: f64,
    p: f64,
) -> Result<f64, DiagError> {
    let g = &u.grid;
    if !(radius > 2.0 * g.h()) {
        return Err(DiagError::Monitor(format!("radius {radius} must exceed 2h = {}", 2.0 * g.h())));
    }
    let e = (p - 2.0) / (p - 1.0);
    let mut best: Option<f64> = None;
    for &k in g.evolved() {
        let q = g.point(k);
        if (q[0] - center[0]).hypot(q[1] - center[1]) <= radius && dist.delta[k] > 0.0 {
            let v = u.values[k] * dist.delta[k].powf(-e);
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    best.ok_or_else(|| DiagError::Monitor(format!("no node within {radius} of {center:?}")))
}

// ---------------------------------------------------------------- pullback samples

/// A point `M(r, s)` fixed at run start.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pullback {
    pub r: f64,
    pub s: f64,
    pub p: Point,
}

/// Sample sets of `ω₀`, `ω₁ = M((0,r₁)×(0,s₁))` and `ω₁,η = M((0,r₁)×(η,s₁))`.
#[derive(Clone, Debug, Serialize)]
pub struct SamplePlan {
    pub omega0: Vec<Pullback>,
    pub omega1: Vec<Pullback>,
    pub omega1_eta: Vec<Pullback>,
    pub r1: f64,
    pub s1: f64,
    pub eta: f64,
}

/// Cell-centred `n × n` sample of `[r_lo, r_hi(s)] × [s_a, s_b]`, optionally
/// jittered within the cells; points outside `Ω` are dropped.
fn box_samples(
    chart: &BoundaryChart,
    domain: &PlanarDomain,
    n: usize,
    (s_a, s_b): (f64, f64),
    r_lo: f64,
    r_hi: impl Fn(f64) -> f64,
    rng: &mut Option<ChaCha8Rng>,
) -> Vec<Pullback> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let ji = rng.as_mut().map_or(0.0, |r| r.gen_range(-0.4..0.4));
        let s = s_a + (s_b - s_a) * (i as f64 + 0.5 + ji) / n as f64;
        let hi = r_hi(s);
        if !(hi > r_lo) {
            continue;
        }
        for j in 0..n {
            let jj = rng.as_mut().map_or(0.0, |r| r.gen_range(-0.4..0.4));
            let r = r_lo + (hi - r_lo) * (j as f64 + 0.5 + jj) / n as f64;
            let p = map_unchecked(chart, r, s);
            if domain.contains(p) {
                out.push(Pullback { r, s, p });
            }
        }
    }
    out
}

impl SamplePlan {
    /// `r ≥ r_min` throughout; `ω₀` is capped by `rmax(s)`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        region: &FlowRegion,
        domain: &PlanarDomain,
        n: usize,
        r_min: f64,
        r1: f64,
        s1: f64,
        eta: f64,
        seed: Option<u64>,
    ) -> Self {
        use rand::SeedableRng;
        let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
        let chart = &region.chart;
        let s0 = region.s0();
        let omega0 = box_samples(chart, domain, n, (0.0, s0), r_min, |s| region.rmax(s), &mut rng);
        let cap = |s: f64| r1.min(region.rmax(s));
        let omega1 = box_samples(chart, domain, n, (0.0, s1), r_min, cap, &mut rng);
        let omega1_eta = box_samples(chart, domain, n, (eta, s1), r_min, cap, &mut rng);
        SamplePlan { omega0, omega1, omega1_eta, r1, s1, eta }
    }
}

/// Field value (clamped at 0) and interpolated gradient at a sample.
fn probe(u: &GridField, q: &Pullback) -> Option<(f64, [f64; 2])> {
    Some((u.sample(q.p)?.max(0.0), u.sample_gradient(q.p)?))
}

/// Minima of `−u_x` on `ω₀ ∩ {x > 0}`, `−u_s` on `ω₀`, `−J` on `ω₁,η` and
/// `−J̄` on `ω₁` (0 for an empty set).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SignMargins {
    pub ux: f64,
    pub us: f64,
    pub j: f64,
    pub jbar: f64,
}

impl SignMargins {
    pub fn min(&self) -> f64 {
        self.ux.min(self.us).min(self.j).min(self.jbar)
    }
}

pub fn sign_monitors(u: &GridField, plan: &SamplePlan, chart: &BoundaryChart, params: &AuxParams) -> SignMargins {
    let min_of = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
    let finite = |m: f64| if m.is_finite() { m } else { 0.0 };
    let w0: Vec<(f64, f64)> = plan
        .omega0
        .par_iter()
        .filter_map(|q| {
            let (_, g) = probe(u, q)?;
            let d = flow_from_cartesian(g, q.r, q.s, chart).ok()?;
            let ux = if q.p[0] > 0.0 { -g[0] } else { f64::INFINITY };
            Some((ux, -d.psi_s))
        })
        .collect();
    let ux = finite(min_of(w0.iter().map(|v| v.0).collect()));
    let us = finite(min_of(w0.iter().map(|v| v.1).collect()));
    let j = finite(min_of(
        plan.omega1_eta
            .par_iter()
            .filter_map(|q| {
                let (v, g) = probe(u, q)?;
                let d = flow_from_cartesian(g, q.r, q.s, chart).ok()?;
                eval_J(v, d.psi_s, q.r, q.s, params, chart).ok().map(|x| -x)
            })
            .collect(),
    ));
    let jbar = finite(min_of(
        plan.omega1
            .par_iter()
            .filter_map(|q| {
                let (v, g) = probe(u, q)?;
                eval_Jbar(v, g[0], q.r, q.s, params).ok().map(|x| -x)
            })
            .collect(),
    ));
    SignMargins { ux, us, j, jbar }
}

/// `min (−u_x)/(rs)` over `ω₁` samples with `rs ≥ h²`; 0 with none left.
pub fn corner_coefficient(u: &GridField, plan: &SamplePlan) -> f64 {
    let h2 = u.grid.h() * u.grid.h();
    plan.omega1
        .par_iter()
        .filter(|q| q.r * q.s >= h2)
        .filter_map(|q| Some(-probe(u, q)?.1[0] / (q.r * q.s)))
        .reduce_with(f64::min)
        .unwrap_or(0.0)
}

/// `max u (s−η)^{2/(q−1)} r^{−(1−2σ)}` over `ω₁,η`.
pub fn profile_quotient(u: &GridField, plan: &SamplePlan, params: &AuxParams) -> f64 {
    plan.omega1_eta
        .par_iter()
        .filter_map(|q| profile_bound(probe(u, q)?.0, q.r, q.s, params).ok())
        .reduce_with(f64::max)
        .unwrap_or(0.0)
}

/// `(u, |∇u|, r)` at the `ω₁` samples, for the Bernstein-type constant `L`.
pub fn l_samples(u: &GridField, plan: &SamplePlan) -> Vec<(f64, f64, f64)> {
    plan.omega1.iter().filter_map(|q| probe(u, q).map(|(v, g)| (v, g[0].hypot(g[1]), q.r))).collect()
}

/// Mirror image of a sample set under `x ↦ −x` (same `r`, `s ↦ −s`).
pub fn mirrored(samples: &[Pullback]) -> Vec<Pullback> {
    samples.iter().map(|q| Pullback { r: q.r, s: -q.s, p: [-q.p[0], q.p[1]] }).collect()
}

/// Corner coefficient on a reflected window: `min u_x/(r|s|)` (the sign of
/// `u_x` flips with `x`).
pub fn corner_coefficient_reflected(u: &GridField, window: &[Pullback]) -> f64 {
    let h2 = u.grid.h() * u.grid.h();
    window
        .iter()
        .filter(|q| q.r * q.s.abs() >= h2)
        .filter_map(|q| Some(probe(u, q)?.1[0] / (q.r * q.s.abs())))
        .reduce(f64::min)
        .unwrap_or(0.0)
}
