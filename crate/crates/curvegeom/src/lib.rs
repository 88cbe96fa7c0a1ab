//! Boundary-fitted coordinates for symmetric planar domains.
//!
//! A [`PlanarDomain`] holds an exact description of `∂Ω`; [`build_chart`]
//! reparametrizes the piece `|s| ≤ s0` around the origin by arclength and
//! [`FlowRegion`] carries the admissible set of the map `M(r,s) = γ(s) + rN(s)`.

pub mod chart;
pub mod domain;
pub mod region;

pub use chart::{build_chart, build_chart_with, BoundaryChart, ChartSample, Frame};
pub use domain::{ArcSpec, Closest, CurveJet, DomainSpec, PlanarDomain, Point};
pub use region::{curvature_center, invert_M, jacobian_M, map_M, map_unchecked, FlowRegion};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("tangent jump of {jump:.3e} rad at arc junction {index}")]
    JunctionTangent { index: usize, jump: f64 },
    #[error("arc {index} does not start on its circle (radius mismatch {mismatch:.3e})")]
    ArcRadius { index: usize, mismatch: f64 },
    #[error("arc chain ends at x = {gap:.3e} instead of the symmetry axis")]
    Closure { gap: f64 },
    #[error("s0 = {s0} must be below half the perimeter ({half})")]
    S0TooLarge { s0: f64, half: f64 },
    #[error("(r, s) = ({r}, {s}) is outside the admissible region")]
    RegionViolation { r: f64, s: f64 },
    #[error("point ({x}, {y}) is outside D_Gamma")]
    OutsideRegion { x: f64, y: f64 },
    #[error("curvature center at infinity at s = {s}")]
    CenterAtInfinity { s: f64 },
}
