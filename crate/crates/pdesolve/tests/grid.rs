use std::sync::Arc;

use curvegeom::{DomainSpec, PlanarDomain};
use pdesolve::grid::{E, W};
use pdesolve::ops::Stencil;
use pdesolve::{read_snapshot, write_snapshot, Grid, GridField, NodeKind, Rect, SnapshotHeader};

fn ellipse() -> PlanarDomain {
    PlanarDomain::new(DomainSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap()
}

#[test]
fn unit_square_has_full_arms() {
    let g = Grid::build(&Rect::unit(), 1.0 / 16.0).unwrap();
    // The first ring touches the boundary with arms of exactly one cell.
    assert_eq!(g.count(NodeKind::Interior), 13 * 13);
    assert_eq!(g.count(NodeKind::NearBoundary), 15 * 15 - 13 * 13);
    assert_eq!(g.count(NodeKind::Interpolated), 0);
    for k in g.inside_nodes() {
        assert!(g.arms(k).iter().all(|&a| (a - 1.0).abs() < 1e-12));
    }
    assert!((g.coef_max() * g.h() * g.h() - 4.0).abs() < 1e-12);
    let c = g.index(g.center_col().unwrap(), 8);
    assert_eq!(g.point(c), [0.5, 0.5]);
}

#[test]
fn bad_spacing_is_rejected() {
    for h in [0.0, -1.0, f64::NAN] {
        assert!(Grid::build(&Rect::unit(), h).is_err());
    }
    assert!(Grid::build_with(&Rect::unit(), 0.1, 1.0).is_err());
}

#[test]
fn ellipse_grid_is_mirror_symmetric() {
    let g = Grid::build(&ellipse(), 0.03).unwrap();
    let c = g.center_col().unwrap();
    assert_eq!(g.point(g.index(c, 0))[0], 0.0);
    for k in 0..g.len() {
        let m = g.mirror(k).unwrap();
        assert_eq!(g.kind(k), g.kind(m));
        let (p, q) = (g.point(k), g.point(m));
        assert_eq!(p[0], -q[0]);
        assert_eq!(p[1], q[1]);
        if g.kind(k).is_inside() {
            let (a, b) = (g.arms(k), g.arms(m));
            assert_eq!(a[E], b[W]);
            assert_eq!(a[2..], b[2..]);
        }
    }
    assert!(g.count(NodeKind::NearBoundary) > 0);
    // Arm ends of cut nodes land on the boundary.
    let dom = ellipse();
    for k in g.inside_nodes() {
        for d in 0..4 {
            if g.is_cut(k, d) {
                assert!(dom.signed_distance(g.arm_end(k, d)).abs() < 1e-9);
            }
        }
    }
}

/// `f = 1 − x²/4 − y'²` vanishes on the ellipse, so the cut-cell stencils are
/// exact for it.
#[test]
fn stencils_are_exact_on_a_quadratic_vanishing_on_the_boundary() {
    let g = Arc::new(Grid::build(&ellipse(), 0.04).unwrap());
    let f = |p: [f64; 2]| 1.0 - p[0] * p[0] / 4.0 - (p[1] - 1.0) * (p[1] - 1.0);
    let u = GridField::from_fn(g.clone(), f);
    let mut checked = 0;
    for &k in g.evolved() {
        let clean = (0..4).all(|d| g.is_cut(k, d) || g.kind(g.neighbor(k, d)) != NodeKind::Interpolated);
        if !clean {
            continue;
        }
        let st = Stencil::gather(&g, &u.values, k, None);
        assert!((st.laplacian() + 2.5).abs() < 1e-8, "{k}: {}", st.laplacian());
        let p = g.point(k);
        let [gx, gy] = st.gradient();
        assert!((gx + p[0] / 2.0).abs() < 1e-10 && (gy + 2.0 * (p[1] - 1.0)).abs() < 1e-10);
        checked += 1;
    }
    assert!(checked > 1000);
    // Interpolated nodes are linear along their cut axis, so within O(h²).
    for l in g.links() {
        assert!((u.values[l.node] - f(g.point(l.node))).abs() < 4.0 * g.h() * g.h());
    }
}

#[test]
fn sampling_reproduces_the_field() {
    let g = Arc::new(Grid::build(&ellipse(), 0.02).unwrap());
    let f = |p: [f64; 2]| 1.0 - p[0] * p[0] / 4.0 - (p[1] - 1.0) * (p[1] - 1.0);
    let u = GridField::from_fn(g.clone(), f);
    for (x, y) in [(0.0, 1.0), (0.31, 0.72), (-1.2, 1.1), (0.05, 0.04)] {
        let v = u.sample([x, y]).unwrap();
        assert!((v - f([x, y])).abs() < 2.0 * g.h() * g.h(), "({x},{y}) {v}");
        let [gx, gy] = u.sample_gradient([x, y]).unwrap();
        assert!((gx + x / 2.0).abs() < 2.0 * g.h() && (gy + 2.0 * (y - 1.0)).abs() < 2.0 * g.h());
    }
    assert!(u.sample([5.0, 5.0]).is_none());
}

#[test]
fn snapshot_round_trip_is_bitwise() {
    let dom = ellipse();
    let g = Arc::new(Grid::build(&dom, 0.05).unwrap());
    let u = GridField::from_fn(g.clone(), |p| (3.0 * p[0]).sin() * p[1] / 3.0);
    let header = SnapshotHeader { grid: g.spec, t: 0.125, p: Some(3.0), provenance: serde_json::json!({"k": "v"}) };
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &header, &u).unwrap();
    let (h2, vals) = read_snapshot(&buf[..]).unwrap();
    assert_eq!(h2, header);
    assert_eq!(vals, u.values);
    let g2 = Grid::from_spec(&dom, h2.grid).unwrap();
    assert_eq!(g2.count(NodeKind::NearBoundary), g.count(NodeKind::NearBoundary));
    assert!(read_snapshot(&buf[..buf.len() / 2]).is_err());
}
