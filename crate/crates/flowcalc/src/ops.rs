//! Differential operators in the coordinates `(r, s)`.

use curvegeom::{BoundaryChart, Point};

use crate::FlowError;

/// Partials of `ψ∘M` at a point `(r, s)`, optionally with the Cartesian gradient.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FlowDerivs {
    pub psi_r: f64,
    pub psi_s: f64,
    pub psi_rr: f64,
    pub psi_ss: f64,
    pub cartesian: Option<Point>,
}

impl FlowDerivs {
    pub fn first(psi_r: f64, psi_s: f64) -> Self {
        FlowDerivs { psi_r, psi_s, ..Default::default() }
    }

    /// Largest violation of `ψ_r = −β′ψ_x + α′ψ_y`, `ψ_s/(1−rK) = α′ψ_x + β′ψ_y`
    /// (zero when no Cartesian pair is stored).
    pub fn frame_residual(&self, r: f64, s: f64, chart: &BoundaryChart) -> Result<f64, FlowError> {
        let Some(c) = self.cartesian else { return Ok(0.0) };
        let f = chart.frame(s);
        let stretch = stretch(r, f.k, s)?;
        let e1 = self.psi_r - (-f.t[1] * c[0] + f.t[0] * c[1]);
        let e2 = self.psi_s / stretch - (f.t[0] * c[0] + f.t[1] * c[1]);
        Ok(e1.abs().max(e2.abs()))
    }
}

pub(crate) fn stretch(r: f64, k: f64, s: f64) -> Result<f64, FlowError> {
    let v = 1.0 - r * k;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(FlowError::RegionViolation { r, s })
    }
}

/// `ψ_r N(s) + ψ_s/(1−rK) T(s)`.
pub fn grad_flow(d: &FlowDerivs, r: f64, s: f64, chart: &BoundaryChart) -> Result<Point, FlowError> {
    let f = chart.frame(s);
    let w = d.psi_s / stretch(r, f.k, s)?;
    Ok([d.psi_r * f.n[0] + w * f.t[0], d.psi_r * f.n[1] + w * f.t[1]])
}

/// `ψ_r φ_r + ψ_s φ_s/(1−rK)²`.
pub fn dot_flow(a: &FlowDerivs, b: &FlowDerivs, r: f64, s: f64, chart: &BoundaryChart) -> Result<f64, FlowError> {
    let st = stretch(r, chart.curvature(s), s)?;
    Ok(a.psi_r * b.psi_r + a.psi_s * b.psi_s / (st * st))
}

/// `ψ_rr − K/(1−rK) ψ_r + ψ_ss/(1−rK)² + rK′/(1−rK)³ ψ_s`.
pub fn laplacian_flow(d: &FlowDerivs, r: f64, s: f64, chart: &BoundaryChart) -> Result<f64, FlowError> {
    let f = chart.frame(s);
    let st = stretch(r, f.k, s)?;
    Ok(d.psi_rr - f.k / st * d.psi_r + d.psi_ss / (st * st) + r * f.kp / (st * st * st) * d.psi_s)
}

/// `ψ_r = −ψ_x/β′ + (α′/β′) ψ_s/(1−rK)`, defined away from `s = 0`.
pub fn psi_r_decompose(psi_x: f64, psi_s: f64, r: f64, s: f64, chart: &BoundaryChart) -> Result<f64, FlowError> {
    let f = chart.frame(s);
    if !(s > 0.0) || f.t[1] <= 1e-10 {
        return Err(FlowError::DecompositionUndefined { s });
    }
    let st = stretch(r, f.k, s)?;
    Ok(-psi_x / f.t[1] + f.t[0] / f.t[1] * psi_s / st)
}

/// Flow partials `(ψ_r, ψ_s)` of a Cartesian gradient.
pub fn flow_from_cartesian(grad: Point, r: f64, s: f64, chart: &BoundaryChart) -> Result<FlowDerivs, FlowError> {
    let f = chart.frame(s);
    let st = stretch(r, f.k, s)?;
    Ok(FlowDerivs {
        psi_r: -f.t[1] * grad[0] + f.t[0] * grad[1],
        psi_s: st * (f.t[0] * grad[0] + f.t[1] * grad[1]),
        cartesian: Some(grad),
        ..Default::default()
    })
}

/// Central-difference flow partials of `ψ∘M` with step `h`.
pub fn fd_flow_derivs<F: Fn(Point) -> f64>(psi: F, r: f64, s: f64, h: f64, chart: &BoundaryChart) -> FlowDerivs {
    let at = |dr: f64, ds: f64| psi(curvegeom::map_unchecked(chart, r + dr, s + ds));
    let c = at(0.0, 0.0);
    let (rp, rm) = (at(h, 0.0), at(-h, 0.0));
    let (sp, sm) = (at(0.0, h), at(0.0, -h));
    FlowDerivs {
        psi_r: (rp - rm) / (2.0 * h),
        psi_s: (sp - sm) / (2.0 * h),
        psi_rr: (rp - 2.0 * c + rm) / (h * h),
        psi_ss: (sp - 2.0 * c + sm) / (h * h),
        cartesian: None,
    }
}
