use std::sync::Arc;

use curvegeom::{build_chart, map_unchecked, DomainSpec, PlanarDomain};
use flowcalc::flow_from_cartesian;
use gbudiag::*;
use pdesolve::{FieldStats, Grid, GridField, SimState, StopCriteria};

fn ellipse(h: f64) -> Setup {
    Setup::with_spacing(DomainSpec::Ellipse { a: 2.0, b: 1.0 }, h).unwrap()
}

fn coarse_cfg() -> RunConfig {
    RunConfig { eps: 0.2, rho: 1.0, ..RunConfig::default() }
}

/// Vanishes on the boundary of the (2, 1) ellipse.
fn smooth(p: [f64; 2]) -> f64 {
    (1.0 - p[0] * p[0] / 4.0 - (p[1] - 1.0).powi(2)) * (1.0 + 0.3 * p[0] + 0.2 * p[1].sin())
}

#[test]
fn zero_field_gives_zero_monitors() {
    let st = ellipse(0.025);
    let u = GridField::zeros(st.grid.clone());
    let f = boundary_flux(&u, &st.region.chart, 513);
    assert!(f.flux.iter().all(|&v| v == 0.0));
    assert_eq!(f.argmax_s, 0.0);
    assert_eq!(f.peak_ratio(), 0.0);
    assert_eq!(nondeg_quotient(&u, &st.dist, [0.0, 0.0], 0.2, 3.0).unwrap(), 0.0);
    let plan = SamplePlan::new(&st.region, st.domain(), 20, st.grid.h(), 0.2, 1.0, 0.1, None);
    assert_eq!(corner_coefficient(&u, &plan), 0.0);
    assert_eq!(bernstein_quotient(&u, &st.dist, 0.0, 3.0, 0.1), Some(0.0));
}

#[test]
fn flux_ties_prefer_the_origin_then_the_left() {
    let s = [-2.0, -1.0, 0.0, 1.0, 2.0];
    assert_eq!(flux_argmax(&s, &[1.0; 5]), 2);
    assert_eq!(flux_argmax(&s, &[0.0, 3.0, 1.0, 3.0, 0.0]), 1);
    assert_eq!(flux_argmax(&s, &[5.0, 3.0, 1.0, 3.0, 5.0]), 0);
    assert_eq!(flux_argmax(&s, &[0.0, 0.0, 1.0, 3.0, 0.0]), 3);
}

#[test]
fn radial_flux_on_a_disk_is_constant_to_first_order() {
    let dom = PlanarDomain::new(DomainSpec::Disk { radius: 1.0 }).unwrap();
    let chart = build_chart(&dom, 2.5).unwrap();
    let mut spreads = Vec::new();
    for h in [0.01, 0.005, 0.0025] {
        let g = Arc::new(Grid::build(&dom, h).unwrap());
        let u = GridField::from_fn(g, |p| 1.0 - p[0] * p[0] - (p[1] - 1.0).powi(2));
        let f = boundary_flux(&u, &chart, 513);
        let lo = f.flux.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = f.flux.iter().copied().fold(0.0, f64::max);
        assert!((lo - 2.0).abs() <= 1.5 * h && (hi - 2.0).abs() <= 1.5 * h, "h {h}: [{lo}, {hi}]");
        spreads.push(hi - lo);
    }
    assert!(spreads[2] < 0.5 * spreads[0], "{spreads:?}");
}

#[test]
fn bump_flux_peaks_on_the_axis() {
    let st = ellipse(0.025);
    let cfg = coarse_cfg();
    let u = st.bump(&cfg, 1.0).unwrap();
    let f = boundary_flux(&u, &st.region.chart, 513);
    assert!(f.argmax_s.abs() <= 0.05 * st.region.s0(), "{}", f.argmax_s);
    assert!(f.peak_ratio() >= 2.0);
    // Mirror-equal values resolve to the left one, never to a far point.
    let again = boundary_flux(&u, &st.region.chart, 513);
    assert_eq!(f, again);
}

#[test]
fn bernstein_starts_nonpositive() {
    let st = ellipse(0.025);
    let u = st.bump(&coarse_cfg(), 1.0).unwrap();
    let c2 = FieldStats::of(&u).max_grad;
    for p in [3.0, 4.0] {
        let b = bernstein_quotient(&u, &st.dist, c2, p, 0.1).unwrap();
        assert!(b <= 1e-12 * c2, "p {p}: {b}");
    }
    assert_eq!(bernstein_quotient(&u, &st.dist, c2, 3.0, 10.0), None);
}

#[test]
fn quotient_exponents_follow_p() {
    let st = ellipse(0.025);
    let g = &st.grid;
    let deep = |dmin: f64| g.evolved().iter().map(|&k| st.dist.delta[k]).filter(|&d| d >= dmin).fold(0.0, f64::max);
    // u = y has unit gradient at every node clear of the boundary.
    let lin = GridField::from_fn(g.clone(), |p| p[1]);
    let dmax = deep(0.1);
    for (p, e) in [(3.0, 0.5), (4.0, 1.0 / 3.0)] {
        let b = bernstein_quotient(&lin, &st.dist, 0.0, p, 0.1).unwrap();
        assert!((b - dmax.powf(e)).abs() < 1e-9, "p {p}: {b} vs {}", dmax.powf(e));
    }
    // u ≡ 1 inside: the quotient is the shallowest depth to the power −(p−2)/(p−1).
    let one = GridField::from_fn(g.clone(), |_| 1.0);
    let c = [0.0, 0.1];
    let r = 0.15;
    let shallow = g
        .evolved()
        .iter()
        .filter(|&&k| {
            let q = g.point(k);
            (q[0] - c[0]).hypot(q[1] - c[1]) <= r && st.dist.delta[k] > 0.0
        })
        .map(|&k| st.dist.delta[k])
        .fold(f64::INFINITY, f64::min);
    for (p, e) in [(3.0, 0.5), (4.0, 2.0 / 3.0)] {
        let q = nondeg_quotient(&one, &st.dist, c, r, p).unwrap();
        assert!((q - shallow.powf(-e)).abs() < 1e-9 * q, "p {p}: {q}");
    }
    assert!(nondeg_quotient(&one, &st.dist, c, 2.0 * g.h(), 3.0).is_err());
    assert!(nondeg_quotient(&one, &st.dist, [0.0, -5.0], 0.2, 3.0).is_err());
}

#[test]
fn pullback_derivative_matches_tracing_s_curves() {
    let h = 0.0125;
    let st = ellipse(h);
    let chart = &st.region.chart;
    let u = GridField::from_fn(st.grid.clone(), smooth);
    let plan = SamplePlan::new(&st.region, st.domain(), 30, 2.0 * h, 0.2, 1.0, 0.1, None);
    let ds = 1e-5;
    let mut worst: f64 = 0.0;
    for q in plan.omega0.iter().filter(|q| q.s > 2.0 * ds) {
        let g = u.sample_gradient(q.p).unwrap();
        let us = flow_from_cartesian(g, q.r, q.s, chart).unwrap().psi_s;
        let direct =
            (smooth(map_unchecked(chart, q.r, q.s + ds)) - smooth(map_unchecked(chart, q.r, q.s - ds))) / (2.0 * ds);
        worst = worst.max((us - direct).abs());
    }
    assert!(worst <= 5.0 * h, "{worst}");
}

#[test]
fn reflected_corner_window_agrees() {
    let st = ellipse(0.025);
    let u = st.bump(&coarse_cfg(), 1.0).unwrap();
    assert_eq!(u.mirror_defect(), 0.0);
    let plan = SamplePlan::new(&st.region, st.domain(), 30, st.grid.h(), 0.3, 1.0, 0.1, None);
    let c = corner_coefficient(&u, &plan);
    let m = corner_coefficient_reflected(&u, &mirrored(&plan.omega1));
    assert!((c - m).abs() <= 1e-8 * c.abs().max(1.0), "{c} vs {m}");
}

#[test]
fn jitter_is_seeded() {
    let st = ellipse(0.025);
    let a = SamplePlan::new(&st.region, st.domain(), 10, 0.025, 0.2, 1.0, 0.1, Some(7));
    let b = SamplePlan::new(&st.region, st.domain(), 10, 0.025, 0.2, 1.0, 0.1, Some(7));
    let c = SamplePlan::new(&st.region, st.domain(), 10, 0.025, 0.2, 1.0, 0.1, None);
    assert_eq!(a.omega0, b.omega0);
    assert_ne!(a.omega0, c.omega0);
    assert!(a.omega0.iter().all(|q| q.r >= 0.025 && q.s >= 0.0));
}

#[test]
fn validated_bump_starts_with_clean_margins() {
    let cfg = RunConfig::default();
    let st = Setup::new(&cfg).unwrap();
    let u = st.bump(&cfg, 1.0).unwrap();
    let mut d =
        Diagnostics::new(&u, st.domain(), st.region.clone(), st.dist.clone(), 3.0, cfg.monitor.clone()).unwrap();
    let s = SimState::new(u, 3.0, StopCriteria::new(1.0, 1e3)).unwrap();
    let r = d.observe(&s).unwrap();
    let tol = 1e-8 * d.u0_c1;
    for m in [r.margin_ux, r.margin_us, r.margin_j, r.margin_jbar] {
        assert!(m >= -tol, "{r:?}");
    }
    assert!(r.bernstein_c1_est <= 1e-12 * d.c2_0);
    assert!(d.params.k() > 0.0 && d.params.k() <= cfg.monitor.k0);
}

#[test]
fn monitored_runs_are_reproducible() {
    let st = ellipse(0.025);
    let mut cfg = coarse_cfg();
    cfg.monitor.every = 5;
    let mut stop = cfg.stop();
    stop.max_steps = Some(30);
    let a = run_monitored(&st, &cfg, st.bump(&cfg, 2.0).unwrap(), stop).unwrap();
    let b = run_monitored(&st, &cfg, st.bump(&cfg, 2.0).unwrap(), stop).unwrap();
    assert_eq!(a.diagnostics.records, b.diagnostics.records);
    assert_eq!(a.state.u.values, b.state.u.values);
    assert_eq!(a.diagnostics.records.len(), 7);
    assert!(invariant_free(&a));
}

fn invariant_free(r: &RunResult) -> bool {
    verdict(&r.summary, &r.diagnostics.records).invariant_violations.is_empty()
}
