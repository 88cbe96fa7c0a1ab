use curvegeom::{
    build_chart, curvature_center, invert_M, jacobian_M, map_M, map_unchecked, DomainSpec, FlowRegion, GeomError,
    PlanarDomain,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ellipse_region(s0: f64) -> FlowRegion {
    let dom = PlanarDomain::new(DomainSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
    FlowRegion::new(build_chart(&dom, s0).unwrap(), Some(1.0))
}

/// Foot of the normal from `p` on the (2,1) ellipse by bisection on the angle,
/// then arclength by composite Simpson: an oracle independent of the chart.
fn ellipse_coordinates_oracle(p: [f64; 2], theta_max: f64) -> (f64, f64) {
    let (a, b) = (2.0f64, 1.0f64);
    let c = |t: f64| [a * t.sin(), b - b * t.cos()];
    let dc = |t: f64| [a * t.cos(), b * t.sin()];
    let g = |t: f64| {
        let q = c(t);
        let d = dc(t);
        (p[0] - q[0]) * d[0] + (p[1] - q[1]) * d[1]
    };
    let (mut lo, mut hi) = (-0.01, theta_max + 0.01);
    assert!(g(lo) > 0.0 && g(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let q = c(t);
    let r = (p[0] - q[0]).hypot(p[1] - q[1]);
    let speed = |t: f64| (a * t.cos()).hypot(b * t.sin());
    let n = 20_000;
    let h = t / n as f64;
    let mut acc = speed(0.0) + speed(t);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * speed(k as f64 * h);
    }
    (r, acc * h / 3.0)
}

#[test]
fn disk_examples() {
    let dom = PlanarDomain::new(DomainSpec::Disk { radius: 1.0 }).unwrap();
    let region = FlowRegion::new(build_chart(&dom, 1.0).unwrap(), None);
    for r in [0.0, 0.3, 0.9] {
        let p = map_M(&region, r, 0.0).unwrap();
        assert!(p[0].abs() < 1e-15 && (p[1] - r).abs() < 1e-15);
    }
    assert!((jacobian_M(&region, 0.5, 0.4).unwrap() + 0.5).abs() < 1e-9);
    let (r, s) = invert_M(&region, [0.0, 0.3]).unwrap();
    assert!((r - 0.3).abs() < 1e-12 && s.abs() < 1e-12);
    assert!(matches!(map_M(&region, 1.01, 0.2), Err(GeomError::RegionViolation { .. })));
}

#[test]
fn boundary_points_invert_to_r_zero() {
    let region = ellipse_region(2.0);
    for k in 0..=50 {
        let s = 2.0 * k as f64 / 50.0;
        let p = region.chart.gamma(s);
        let (r, s_back) = invert_M(&region, p).unwrap();
        assert!(r.abs() < 1e-9 && (s_back - s).abs() < 1e-9, "s = {s}");
    }
}

#[test]
fn invert_matches_closest_point_oracle() {
    let s0 = 2.0;
    let region = ellipse_region(s0);
    let theta_max = {
        // Angle of γ(s0).
        let g = region.chart.gamma(s0);
        (g[0] / 2.0).asin()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 300 {
        let s = rng.gen_range(0.0..s0);
        let r = rng.gen_range(0.0..0.999) * region.rmax(s).min(3.0);
        let p = map_M(&region, r, s).unwrap();
        let (ro, so) = ellipse_coordinates_oracle(p, theta_max);
        assert!((ro - r).abs() < 1e-9 && (so - s).abs() < 1e-9, "({r}, {s}) vs oracle ({ro}, {so})");
        checked += 1;
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let region = ellipse_region(2.0);
    let h = 1e-6;
    for i in 0..32 {
        for j in 0..32 {
            let s = 2.0 * (j as f64 + 0.5) / 32.0;
            let r = region.rmax(s) * (i as f64 + 0.5) / 32.0;
            let mr = |dr: f64, ds: f64| map_unchecked(&region.chart, r + dr, s + ds);
            let (a, b) = (mr(h, 0.0), mr(-h, 0.0));
            let (c, d) = (mr(0.0, h), mr(0.0, -h));
            let m_r = [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)];
            let m_s = [(c[0] - d[0]) / (2.0 * h), (c[1] - d[1]) / (2.0 * h)];
            let det = m_r[0] * m_s[1] - m_r[1] * m_s[0];
            let jac = jacobian_M(&region, r, s).unwrap();
            assert!((det - jac).abs() < 1e-6, "({r},{s}): {det} vs {jac}");
            assert!(jac < 0.0);
        }
    }
}

#[test]
fn evolute_monotonicity_on_ellipse() {
    let region = ellipse_region(2.2);
    let chart = &region.chart;
    let pts: Vec<f64> = (0..=200).map(|k| 2.2 * k as f64 / 200.0).collect();
    for (i, &s1) in pts.iter().enumerate() {
        let f1 = chart.frame(s1);
        for &s2 in &pts[i + 1..] {
            let g2 = chart.gamma(s2);
            let c2 = curvature_center(chart, s2).unwrap();
            let along = f1.t[0] * (g2[0] - f1.gamma[0]) + f1.t[1] * (g2[1] - f1.gamma[1]);
            let along_c = f1.t[0] * (c2[0] - f1.gamma[0]) + f1.t[1] * (c2[1] - f1.gamma[1]);
            assert!(along > 0.0, "{s1} {s2}");
            assert!(along_c >= -1e-9, "{s1} {s2}: {along_c}");
        }
    }
}

#[test]
fn points_outside_are_rejected() {
    let region = ellipse_region(1.0);
    // Left of the y axis, beyond the normal at s0, and below the boundary.
    for p in [[-0.3, 0.4], [1.9, 0.6], [0.5, -0.2]] {
        assert!(matches!(invert_M(&region, p), Err(GeomError::OutsideRegion { .. })), "{p:?}");
    }
}

fn any_chart_region() -> impl Strategy<Value = (u8, f64)> {
    (0u8..3, 0.3f64..0.9)
}

fn region_for(kind: u8, frac: f64) -> FlowRegion {
    let spec = match kind {
        0 => DomainSpec::Ellipse { a: 2.0, b: 1.0 },
        1 => DomainSpec::Disk { radius: 1.0 },
        _ => DomainSpec::figure_one(),
    };
    let dom = PlanarDomain::new(spec).unwrap();
    let s0 = frac * dom.half_length() * 0.5;
    FlowRegion::new(build_chart(&dom, s0).unwrap(), None)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roundtrip_and_jacobian_sign((kind, frac) in any_chart_region(), u in 0.0f64..1.0, v in 0.0f64..0.98) {
        let region = region_for(kind, frac);
        let s = u * region.s0();
        let r = v * region.rmax(s).min(2.0);
        let p = map_M(&region, r, s).unwrap();
        let (r2, s2) = invert_M(&region, p).unwrap();
        prop_assert!((r2 - r).abs() < 1e-9 && (s2 - s).abs() < 1e-9);
        prop_assert!(jacobian_M(&region, r, s).unwrap() < 0.0);
        prop_assert!(1.0 - r * region.chart.curvature(s) > 0.0);
    }

    #[test]
    fn distinct_coordinates_map_to_distinct_points(
        (kind, frac) in any_chart_region(),
        a in (0.0f64..1.0, 0.0f64..0.98),
        b in (0.0f64..1.0, 0.0f64..0.98),
    ) {
        let region = region_for(kind, frac);
        let coord = |(u, v): (f64, f64)| {
            let s = u * region.s0();
            (v * region.rmax(s).min(2.0), s)
        };
        let (r1, s1) = coord(a);
        let (r2, s2) = coord(b);
        prop_assume!((r1 - r2).abs() > 1e-4 || (s1 - s2).abs() > 1e-4);
        let p1 = map_M(&region, r1, s1).unwrap();
        let p2 = map_M(&region, r2, s2).unwrap();
        prop_assert!((p1[0] - p2[0]).hypot(p1[1] - p2[1]) > 1e-8);
    }
}
