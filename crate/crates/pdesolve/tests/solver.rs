use std::sync::Arc;

use curvegeom::{DomainSpec, PlanarDomain};
use pdesolve::{heat_harness, run, step, Grid, GridField, SimState, SolveError, StopCriteria, StopReason};
use proptest::prelude::*;

fn ellipse_grid(h: f64) -> Arc<Grid> {
    let dom = PlanarDomain::new(DomainSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
    Arc::new(Grid::build(&dom, h).unwrap())
}

fn disk_grid(h: f64) -> Arc<Grid> {
    let dom = PlanarDomain::new(DomainSpec::Disk { radius: 1.0 }).unwrap();
    Arc::new(Grid::build(&dom, h).unwrap())
}

/// Smooth bump of height `amp` and radius `w` around `c`.
fn bump(grid: Arc<Grid>, c: [f64; 2], w: f64, amp: f64) -> GridField {
    GridField::from_fn(grid, move |p| {
        let d2 = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)) / (w * w);
        if d2 < 1.0 {
            amp * (1.0 - 1.0 / (1.0 - d2)).exp()
        } else {
            0.0
        }
    })
}

#[test]
fn zero_data_is_an_equilibrium() {
    let u = GridField::zeros(ellipse_grid(0.05));
    let mut st = SimState::new(u, 3.0, StopCriteria::new(1e-3, f64::INFINITY)).unwrap();
    let out = run(&mut st, 20, |_| {}).unwrap();
    assert_eq!(out.reason, StopReason::TEnd);
    assert_eq!(st.t, 1e-3);
    assert!(st.u.values.iter().all(|&v| v == 0.0));
}

#[test]
fn infinite_m_stop_ends_on_t_end() {
    let g = ellipse_grid(0.05);
    let u = bump(g, [0.3, 0.8], 0.4, 0.5);
    let mut st = SimState::new(u, 3.0, StopCriteria::new(2e-3, f64::INFINITY)).unwrap();
    let mut seen = Vec::new();
    let out = run(&mut st, 7, |s| seen.push(s.steps)).unwrap();
    assert_eq!(out.reason, StopReason::TEnd);
    assert_eq!(st.t, 2e-3);
    assert_eq!(seen[0], 0);
    assert_eq!(*seen.last().unwrap(), out.steps);
    assert!(seen.windows(2).all(|w| w[0] < w[1]));
    assert!(st.events.last().unwrap().kind.contains("TEnd"));
}

#[test]
fn heat_harness_is_second_order() {
    let runs: Vec<_> = [32, 64, 128].iter().map(|&n| heat_harness(n, 0.05).unwrap()).collect();
    let fine = runs[2];
    assert_eq!(fine.t, 0.05);
    assert!(fine.error / fine.exact < 0.02, "{fine:?}");
    for w in runs.windows(2) {
        let factor = w[0].error / w[1].error;
        assert!((3.2..=4.8).contains(&factor), "{factor}");
    }
}

#[test]
fn cfl_step_follows_both_limits() {
    let g = ellipse_grid(0.05);
    let h = g.h();
    let sigma = g.coef_max();
    let st = SimState::new(GridField::zeros(g.clone()), 3.0, StopCriteria::new(1.0, f64::INFINITY)).unwrap();
    assert!((st.cfl_dt() - 0.4 / sigma).abs() < 1e-18);
    let u = bump(g, [0.0, 0.6], 0.3, 20.0);
    let st = SimState::new(u, 3.0, StopCriteria::new(1.0, f64::INFINITY)).unwrap();
    let gmax = st.stats.max_upwind;
    let adv = 0.4 * h / (3.0 * gmax * gmax + 1e-12);
    assert!(adv < 0.4 / sigma);
    assert!((st.cfl_dt() - adv).abs() < 1e-15 * adv.max(1.0));
}

#[test]
fn m_stop_fires_on_the_gradient() {
    let u = bump(ellipse_grid(0.05), [0.0, 0.5], 0.4, 1.0);
    let mut st = SimState::new(u, 3.0, StopCriteria::new(1.0, 1.0)).unwrap();
    let out = run(&mut st, 20, |_| {}).unwrap();
    assert_eq!(out.reason, StopReason::MStop);
    assert_eq!(out.steps, 0);
}

#[test]
fn dt_underflow_is_a_truncation_event() {
    let u = bump(ellipse_grid(0.05), [0.0, 0.5], 0.4, 1.0);
    let mut stop = StopCriteria::new(1.0, f64::INFINITY);
    stop.dt_min = 1.0;
    let mut st = SimState::new(u, 3.0, stop).unwrap();
    assert!(matches!(step(&mut st), Err(SolveError::DtUnderflow { .. })));
    let out = run(&mut st, 20, |_| {}).unwrap();
    assert_eq!(out.reason, StopReason::DtUnderflow);
    assert!(st.events.iter().any(|e| e.kind == "blow-up truncation"));
}

#[test]
fn non_finite_data_is_rejected() {
    let g = ellipse_grid(0.1);
    let mut u = GridField::zeros(g.clone());
    let k = g.evolved()[3];
    u.values[k] = f64::NAN;
    assert!(
        matches!(SimState::new(u, 3.0, StopCriteria::new(1.0, 1.0)), Err(SolveError::NonFinite { node, .. }) if node == k)
    );
    assert!(SimState::new(GridField::zeros(g), 1.0, StopCriteria::new(1.0, 1.0)).is_err());
}

#[test]
fn auxiliary_stops() {
    let u = bump(disk_grid(0.05), [0.0, 1.0], 0.5, 1.0);
    let mut stop = StopCriteria::new(1.0, f64::INFINITY);
    stop.max_steps = Some(17);
    let mut st = SimState::new(u.clone(), 3.0, stop).unwrap();
    assert_eq!(run(&mut st, 5, |_| {}).unwrap().reason, StopReason::MaxSteps);
    assert_eq!(st.steps, 17);

    let mut stop = StopCriteria::new(1.0, f64::INFINITY);
    stop.decay_below = Some(0.5);
    let mut st = SimState::new(u.clone(), 3.0, stop).unwrap();
    assert_eq!(run(&mut st, 50, |_| {}).unwrap().reason, StopReason::Decayed);
    assert!(st.stats.max_u <= 0.5);

    // A centred bump only smooths out: its gradient never rises again.
    let mut stop = StopCriteria::new(0.05, f64::INFINITY);
    stop.past_peak = Some(0.9);
    let mut st = SimState::new(u, 3.0, stop).unwrap();
    assert_eq!(run(&mut st, 50, |_| {}).unwrap().reason, StopReason::TEnd);

    // Off centre, the gradient dips, recovers slightly near the boundary,
    // then decays.
    let mut stop = StopCriteria::new(1.0, f64::INFINITY);
    stop.past_peak = Some(0.99);
    let mut st = SimState::new(bump(disk_grid(0.05), [0.0, 0.6], 0.5, 1.0), 3.0, stop).unwrap();
    assert_eq!(run(&mut st, 50, |_| {}).unwrap().reason, StopReason::PastPeak);
    assert!(st.stats.max_grad <= 0.99 * st.peak_grad);
    assert!(st.peak_grad > st.trough_grad);
}

#[test]
fn monitors_do_not_change_the_solution() {
    let u = bump(ellipse_grid(0.05), [0.4, 0.5], 0.4, 3.0);
    let stop = StopCriteria::new(5e-3, f64::INFINITY);
    let mut a = SimState::new(u.clone(), 3.0, stop).unwrap();
    let mut b = SimState::new(u, 3.0, stop).unwrap();
    run(&mut a, 1, |s| {
        let _ = s.u.mirror_defect();
    })
    .unwrap();
    run(&mut b, u64::MAX, |_| {}).unwrap();
    assert_eq!(a.u.values, b.u.values);
    assert_eq!(a.steps, b.steps);
}

#[test]
fn symmetric_data_stays_symmetric() {
    let g = ellipse_grid(0.025);
    let u = bump(g, [0.0, 0.25], 0.22, 4.0);
    let norm = u.max();
    let mut st = SimState::new(u, 3.0, StopCriteria::new(2e-3, f64::INFINITY)).unwrap();
    let mut worst = 0.0f64;
    run(&mut st, 10, |s| worst = worst.max(s.u.mirror_defect())).unwrap();
    assert!(worst < 1e-10 * norm, "{worst}");
    assert!(st.steps > 50);
}

/// Max principle and positivity for a nonlinear run, checked at every step.
fn check_run(u: GridField, p: f64, t_end: f64) -> Result<(), TestCaseError> {
    let u0 = u.max();
    let mut st = SimState::new(u, p, StopCriteria::new(t_end, f64::INFINITY)).unwrap();
    let mut prev = st.stats.max_u;
    let mut ok = Ok(());
    run(&mut st, 1, |s| {
        if s.stats.max_u > prev + 1e-8 * u0 * s.dt.max(1e-300) || s.stats.min_u < -1e-12 {
            ok = Err(TestCaseError::fail(format!("step {}: {:?}", s.steps, s.stats)));
        }
        prev = s.stats.max_u;
    })
    .unwrap();
    ok?;
    prop_assert!(st.u.values.iter().all(|&v| v >= -1e-12));
    Ok(())
}

#[test]
fn steep_run_obeys_the_maximum_principle() {
    let u = bump(ellipse_grid(0.02), [0.0, 0.12], 0.1, 2.0);
    check_run(u, 3.0, 2e-3).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_bumps_stay_positive_and_bounded(
        cx in -0.5f64..0.5, cy in 0.3f64..1.7, w in 0.15f64..0.5, amp in 0.0f64..6.0, p in 2.2f64..4.0,
    ) {
        let u = bump(disk_grid(0.05), [cx, cy], w, amp);
        check_run(u, p, 2e-3)?;
    }
}
