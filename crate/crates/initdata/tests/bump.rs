use std::sync::Arc;

use curvegeom::{build_chart, map_unchecked, DomainSpec, FlowRegion, PlanarDomain};
use initdata::cli::{mkinit, MkinitArgs};
use initdata::{
    check_us_sign_at_t0, make_bump, omega0_samples, phi, phi_prime, validate_u0, Bump, BumpSpec, InitError,
    MONOTONE_TOL,
};
use pdesolve::{read_snapshot, Grid, NodeKind};
use proptest::prelude::*;

fn ellipse() -> PlanarDomain {
    PlanarDomain::new(DomainSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap()
}

fn region(dom: &PlanarDomain) -> FlowRegion {
    FlowRegion::new(build_chart(dom, 1.5).unwrap(), Some(1.0))
}

#[test]
fn profile_has_the_required_shape() {
    assert_eq!(phi(0.0), 1.0);
    assert_eq!(phi(1.0), 1.0);
    assert_eq!(phi(1.5), 0.0);
    assert_eq!(phi(7.0), 0.0);
    for i in 0..=200 {
        let t = 0.9 + 0.7 * i as f64 / 200.0;
        assert!(phi_prime(t) <= 0.0);
        let d = 1e-6;
        if t > 1.0 + d && t < 1.5 - d {
            let fd = (phi(t + d) - phi(t - d)) / (2.0 * d);
            assert!((fd - phi_prime(t)).abs() < 1e-5 * (1.0 + fd.abs()), "{t}: {fd} vs {}", phi_prime(t));
        }
    }
}

#[test]
fn spec_invariants() {
    let s = BumpSpec::at_origin(0.05, 0.4, 2.0, 3.0);
    assert!(s.check().is_ok());
    assert!((s.k() - 0.5).abs() < 1e-15);
    let mut bad = s;
    bad.eps = 0.1;
    assert!(bad.check().is_err());
    let mut bad = s;
    bad.p = 2.0;
    assert!(bad.check().is_err());
    let mut bad = s;
    bad.c1 = 2.0 / 0.05f64.sqrt();
    assert!(bad.check().is_err());
}

#[test]
fn p3_threshold_is_c1_sqrt_eps() {
    let mut s = BumpSpec::at_origin(0.05, 0.4, 2.0, 3.0);
    s.c1 = 1.5;
    assert!((s.inf_threshold() - 1.5 * 0.05f64.sqrt()).abs() < 1e-15);
    s.p = 4.0;
    assert!((s.inf_threshold() - 1.5 * 0.05f64.powf(2.0 / 3.0)).abs() < 1e-15);
}

#[test]
fn make_bump_examples() {
    let dom = ellipse();
    let eps = 0.05;
    let grid = Arc::new(Grid::build(&dom, eps / 8.0).unwrap());
    let u = make_bump(BumpSpec::at_origin(eps, 0.4, 3.0, 3.0), &dom, grid.clone()).unwrap();
    for k in 0..grid.len() {
        if !grid.kind(k).is_inside() {
            assert_eq!(u.values[k], 0.0);
        }
        assert!(u.values[k] >= 0.0);
    }
    // (0, ε) is a node since ε is a multiple of h.
    let c = grid.index(grid.center_col().unwrap(), 8);
    assert_eq!(grid.point(c), [0.0, eps]);
    assert_eq!(u.values[c], 3.0);
    assert_eq!(u.mirror_defect(), 0.0);
    assert!(grid.count(NodeKind::Interior) > 100_000);
}

#[test]
fn make_bump_errors() {
    let dom = ellipse();
    let coarse = Arc::new(Grid::build(&dom, 0.01).unwrap());
    let spec = BumpSpec::at_origin(0.05, 0.4, 1.0, 3.0);
    assert!(matches!(make_bump(spec, &dom, coarse), Err(InitError::GridTooCoarse { .. })));
    // Centred at (0, 1.5) the ball of radius 1.5 pokes through the top at y = 2.
    let mut s = BumpSpec::at_origin(1.5, 7.0, 1.0, 3.0);
    assert!(
        matches!(Bump::new(s, &dom), Err(InitError::BallNotInside { clearance, .. }) if (clearance - 0.5).abs() < 1e-6)
    );
    s.base = [0.5, 0.5];
    assert!(matches!(Bump::new(s, &dom), Err(InitError::BaseOffBoundary { .. })));
}

#[test]
fn compliant_bump_passes_validation() {
    let dom = ellipse();
    let eps = 0.05;
    let grid = Arc::new(Grid::build(&dom, eps / 8.0).unwrap());
    let mut spec = BumpSpec::at_origin(eps, 0.4, 2.0, 3.0);
    spec.c1 = 1.0;
    let u = make_bump(spec, &dom, grid).unwrap();
    let v = validate_u0(&u, &spec, &dom, &region(&dom), 1e-8);
    assert!(v.pass(), "{v:#?}");
    assert!(v.support.value <= 0.2 && v.sup.value == 2.0);
    assert!(v.inf.bound == 0.05f64.sqrt() && v.inf.value >= v.inf.bound);
    assert_eq!(v.symmetry.value, 0.0);
    assert!(v.monotone_x.value <= MONOTONE_TOL);
}

#[test]
fn off_axis_bump_fails_symmetry_with_a_witness() {
    let dom = ellipse();
    let eps = 0.05;
    let grid = Arc::new(Grid::build(&dom, eps / 8.0).unwrap());
    let spec = BumpSpec::at_origin(eps, 0.4, 2.0, 3.0);
    let shifted = Bump { spec, center: [0.02, eps] };
    let u = pdesolve::GridField::from_fn(grid, |p| shifted.eval(p));
    let v = validate_u0(&u, &spec, &dom, &region(&dom), 1e-8);
    assert!(!v.symmetry.pass && v.symmetry.value > 0.1);
    let w = v.symmetry.witness.unwrap();
    assert!(w[0] < 0.0 && (w[1] - eps).abs() < 2.0 * eps);
    assert!(!v.monotone_x.pass);
    assert!(!v.pass());
}

/// `u_s` from the pullback formula against a difference quotient of the
/// closed-form bump along the `s`-coordinate curves.
#[test]
fn us_matches_differences_along_s_curves() {
    let dom = ellipse();
    let reg = region(&dom);
    let spec = BumpSpec::at_origin(0.05, 0.4, 2.0, 3.0);
    let bump = Bump::new(spec, &dom).unwrap();
    let ds = 1e-6;
    let mut worst = 0.0f64;
    let mut min_neg_us = f64::INFINITY;
    for (r, s, p) in omega0_samples(&reg, &dom, 60, 0.0) {
        let g = bump.grad(p);
        let f = reg.chart.frame(s);
        let us = (1.0 - r * f.k) * (f.t[0] * g[0] + f.t[1] * g[1]);
        let fd = (bump.eval(map_unchecked(&reg.chart, r, s + ds)) - bump.eval(map_unchecked(&reg.chart, r, s - ds)))
            / (2.0 * ds);
        worst = worst.max((us - fd).abs());
        min_neg_us = min_neg_us.min(-fd);
    }
    assert!(worst < 1e-3, "{worst}");
    assert!(min_neg_us >= -1e-8, "{min_neg_us}");
    let rep = check_us_sign_at_t0(&bump, &dom, &reg, 40);
    assert!(rep.margin >= -1e-8 && rep.samples > 1000, "{rep:?}");
}

#[test]
fn us_sign_needs_the_centre_below_the_curvature_centre() {
    let dom = ellipse();
    let reg = region(&dom);
    // ε = 0.5 still keeps the centre below every normal crossing, so the sign holds.
    let big = Bump::new(BumpSpec::at_origin(0.5, 2.5, 1.0, 3.0), &dom).unwrap();
    assert!(check_us_sign_at_t0(&big, &dom, &reg, 40).margin >= -1e-8);
    // A centre above every normal crossing of the sampled arc (all below the
    // curvature centre (0, 4)) breaks it.
    let spec = BumpSpec::at_origin(8.0, 33.0, 1.0, 3.0);
    let far = Bump { spec, center: [0.0, 6.0] };
    let rep = check_us_sign_at_t0(&far, &dom, &reg, 40);
    assert!(rep.margin < 0.0, "{rep:?}");
    let (_, s) = rep.witness_rs.unwrap();
    assert!(s > 0.0);
}

#[test]
fn mkinit_writes_a_readable_snapshot() {
    let dir = std::env::temp_dir().join(format!("mkinit-{}", std::process::id()));
    let out = dir.join("u0.snap");
    let args = MkinitArgs {
        domain: "ellipse".into(),
        eps: 0.2,
        rho: 1.0,
        amp: 1.5,
        c1: 0.0,
        p: 3.0,
        h: None,
        out: out.clone(),
    };
    let header = mkinit(&args).unwrap();
    let (h2, vals) = read_snapshot(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap();
    assert_eq!(h2, header);
    assert_eq!(header.grid.h, 0.025);
    assert_eq!(vals.iter().copied().fold(0.0, f64::max), 1.5);
    assert_eq!(header.provenance["bump"]["eps"], 0.2);
    let bad = MkinitArgs { h: Some(0.1), ..args };
    assert!(mkinit(&bad).is_err());
    std::fs::remove_dir_all(dir).ok();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bumps_are_nonnegative_symmetric_and_supported(eps in 0.04f64..0.09, amp in 0.0f64..10.0) {
        let dom = ellipse();
        let grid = Arc::new(Grid::build(&dom, eps / 8.0).unwrap());
        let spec = BumpSpec::at_origin(eps, 4.0 * eps + 0.05, amp, 3.0);
        let u = make_bump(spec, &dom, grid.clone()).unwrap();
        prop_assert_eq!(u.mirror_defect(), 0.0);
        for k in 0..grid.len() {
            let v = u.values[k];
            prop_assert!(v >= 0.0 && v <= amp);
            if v > 0.0 {
                let p = grid.point(k);
                prop_assert!(p[0].hypot(p[1] - eps) < 0.75 * eps);
            }
        }
    }
}
