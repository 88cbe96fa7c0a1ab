//! Auxiliary functions `J`, `J̄`, the quantity `Θ` and parameter feasibility.

use curvegeom::{BoundaryChart, Point};
use serde::Serialize;

use crate::ops::{grad_flow, stretch, FlowDerivs};
use crate::FlowError;

/// Free inputs of [`AuxParams`]; `γ` is never an input.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AuxInputs {
    pub p: f64,
    pub sigma: f64,
    pub q: f64,
    pub k: f64,
    pub eta: f64,
    pub r0: f64,
    pub r1: f64,
    pub s1: f64,
    /// `K₁ = max K` on `[0, s0]`.
    pub k1: f64,
    /// Slope bound `β′(s) ≤ τ s`.
    pub tau: f64,
    /// Empirical Bernstein constant.
    pub l: f64,
}

/// Parameters of the auxiliary functions with `γ = (1−2σ)(q−1)` kept in sync.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuxParams {
    inputs: AuxInputs,
    gamma: f64,
    report: FeasibilityReport,
}

impl AuxParams {
    pub fn new(inputs: AuxInputs) -> Result<Self, FlowError> {
        let AuxInputs { p, sigma, q, k, eta, .. } = inputs;
        let bad = |m: String| Err(FlowError::InvalidParams(m));
        if !(p > 2.0) {
            return bad(format!("p = {p} must exceed 2"));
        }
        if !(sigma > 0.0 && sigma < sigma_max(p)) {
            return bad(format!("sigma = {sigma} must lie in (0, {})", sigma_max(p)));
        }
        if !(q > 1.0 && q < 2.0) {
            return bad(format!("q = {q} must lie in (1, 2)"));
        }
        if !(0.0..1.0).contains(&k) {
            return bad(format!("k = {k} must lie in [0, 1)"));
        }
        if !(eta >= 0.0) {
            return bad(format!("eta = {eta} must be nonnegative"));
        }
        for (name, v) in [
            ("r0", inputs.r0),
            ("r1", inputs.r1),
            ("s1", inputs.s1),
            ("K1", inputs.k1),
            ("tau", inputs.tau),
            ("L", inputs.l),
        ] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} = {v} must be finite and nonnegative"));
            }
        }
        let gamma = (1.0 - 2.0 * sigma) * (q - 1.0);
        let report = feasibility(&inputs, gamma);
        Ok(AuxParams { inputs, gamma, report })
    }

    /// Copy with some inputs changed; `γ` and the feasibility flags are recomputed.
    pub fn with(&self, f: impl FnOnce(&mut AuxInputs)) -> Result<Self, FlowError> {
        let mut inputs = self.inputs;
        f(&mut inputs);
        AuxParams::new(inputs)
    }

    pub fn inputs(&self) -> &AuxInputs {
        &self.inputs
    }
    pub fn p(&self) -> f64 {
        self.inputs.p
    }
    pub fn sigma(&self) -> f64 {
        self.inputs.sigma
    }
    pub fn q(&self) -> f64 {
        self.inputs.q
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn k(&self) -> f64 {
        self.inputs.k
    }
    pub fn eta(&self) -> f64 {
        self.inputs.eta
    }
    pub fn r1(&self) -> f64 {
        self.inputs.r1
    }
    pub fn s1(&self) -> f64 {
        self.inputs.s1
    }
    pub fn tau(&self) -> f64 {
        self.inputs.tau
    }
    pub fn l(&self) -> f64 {
        self.inputs.l
    }
    pub fn hyp_gamma_ok(&self) -> bool {
        self.report.hyp_gamma_ok
    }
    pub fn hyp_r1_ok(&self) -> bool {
        self.report.hyp_r1_ok
    }
    pub fn report(&self) -> &FeasibilityReport {
        &self.report
    }
}

/// Upper end `1/(2(p−1))` of the `σ` range.
pub fn sigma_max(p: f64) -> f64 {
    1.0 / (2.0 * (p - 1.0))
}

/// The `q` giving a prescribed `γ` at fixed `σ`.
pub fn q_for_gamma(gamma: f64, sigma: f64) -> f64 {
    1.0 + gamma / (1.0 - 2.0 * sigma)
}

/// Margins of the two parameter hypotheses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub gamma: f64,
    pub gamma_bound: f64,
    /// `min(γ, bound − γ)`: positive iff `0 < γ < bound`.
    pub gamma_margin: f64,
    pub hyp_gamma_ok: bool,
    pub r1: f64,
    pub r1_terms: Vec<(String, f64)>,
    pub r1_bound: f64,
    /// `min(r₁, bound − r₁)`.
    pub r1_margin: f64,
    pub hyp_r1_ok: bool,
    pub feasible: bool,
    /// Name of the violated (or, when feasible, the active) constraint.
    pub binding: String,
    pub suggested_gamma_max: f64,
    pub suggested_r1_max: f64,
    /// Nondegeneracy exponent `(p−2)/(p−1)`.
    pub k_exponent: f64,
}

fn feasibility(inp: &AuxInputs, gamma: f64) -> FeasibilityReport {
    let (p, q, l) = (inp.p, inp.q, inp.l);
    let gamma_bound = inp.sigma * (0.25f64).min(1.0 / (p * p * l.powf(p - 1.0)));
    let gamma_margin = gamma.min(gamma_bound - gamma);
    let lsum = p * l.powf(q + p - 2.0) + 2.0 * q * l.powf(q - 1.0);
    let g2 = gamma * gamma;
    let r1_terms = vec![
        ("r0".to_string(), inp.r0),
        ("one".to_string(), 1.0),
        ("curvature".to_string(), g2 / (2.0 * inp.k1)),
        ("tau".to_string(), g2 / (2.0 * inp.tau)),
        ("bernstein".to_string(), 3.0 * g2 / (2.0 * lsum)),
    ];
    let (r1_name, r1_bound) =
        r1_terms
            .iter()
            .fold(("none".to_string(), f64::INFINITY), |acc, (n, v)| if *v < acc.1 { (n.clone(), *v) } else { acc });
    let r1_margin = inp.r1.min(r1_bound - inp.r1);
    let hyp_gamma_ok = gamma_margin > 0.0;
    let hyp_r1_ok = r1_margin > 0.0;
    let binding = if !hyp_gamma_ok { "hypGamma".to_string() } else { format!("hypr1:{r1_name}") };
    FeasibilityReport {
        gamma,
        gamma_bound,
        gamma_margin,
        hyp_gamma_ok,
        r1: inp.r1,
        r1_terms,
        r1_bound,
        r1_margin,
        hyp_r1_ok,
        feasible: hyp_gamma_ok && hyp_r1_ok,
        binding,
        suggested_gamma_max: gamma_bound,
        suggested_r1_max: r1_bound.max(0.0),
        k_exponent: (p - 2.0) / (p - 1.0),
    }
}

/// Feasibility report for the current parameters.
pub fn check_params(params: &AuxParams) -> FeasibilityReport {
    params.report.clone()
}

/// The three Bernstein-type constants of a field snapshot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct LEstimates {
    /// From `u^q|∇u|^{p−2} ≤ L^{q+p−2} r^{(q−1)(p−2)/(p−1)}`.
    pub l_grad_weighted: f64,
    /// From `u^{q−1} ≤ L^{q−1} r^{(q−1)(p−2)/(p−1)}`.
    pub l_value: f64,
    /// From `u|∇u|^{p−2} ≤ L^{p−1}`.
    pub l_grad: f64,
}

impl LEstimates {
    /// Suprema over samples `(u, |∇u|, r)`; points with `r ≤ 0` only enter the third.
    pub fn from_samples<I: IntoIterator<Item = (f64, f64, f64)>>(samples: I, p: f64, q: f64) -> Self {
        let e = (q - 1.0) * (p - 2.0) / (p - 1.0);
        let mut out = LEstimates::default();
        for (u, g, r) in samples {
            if !(u > 0.0) {
                continue;
            }
            let gp = g.powf(p - 2.0);
            out.l_grad = out.l_grad.max((u * gp).powf(1.0 / (p - 1.0)));
            if r > 0.0 {
                let re = r.powf(e);
                out.l_grad_weighted = out.l_grad_weighted.max((u.powf(q) * gp / re).powf(1.0 / (q + p - 2.0)));
                out.l_value = out.l_value.max((u.powf(q - 1.0) / re).powf(1.0 / (q - 1.0)));
            }
        }
        out
    }

    pub fn max(&self) -> f64 {
        self.l_grad_weighted.max(self.l_value).max(self.l_grad)
    }
}

fn positive_r(r: f64, s: f64, u: f64) -> Result<(), FlowError> {
    if !(u >= 0.0) {
        return Err(FlowError::InvalidState(format!("u = {u} must be nonnegative")));
    }
    if r > 0.0 || (r == 0.0 && u == 0.0) {
        Ok(())
    } else if r == 0.0 {
        Err(FlowError::SingularWeight { r, s })
    } else {
        Err(FlowError::RegionViolation { r, s })
    }
}

/// `d(r)F(u) = r^{−γ}u^q`, zero when `u = 0`.
fn weight(u: f64, r: f64, gamma: f64, q: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        r.powf(-gamma) * u.powf(q)
    }
}

/// `J = u_s/(1−rK) + k(s−η) r^{−γ} u^q`.
#[allow(non_snake_case)]
pub fn eval_J(u: f64, u_s: f64, r: f64, s: f64, params: &AuxParams, chart: &BoundaryChart) -> Result<f64, FlowError> {
    positive_r(r, s, u)?;
    let st = stretch(r, chart.curvature(s), s)?;
    Ok(u_s / st + params.k() * (s - params.eta()) * weight(u, r, params.gamma, params.q()))
}

/// `J̄ = u_x + k s r^{−γ} u^q`.
#[allow(non_snake_case)]
pub fn eval_Jbar(u: f64, u_x: f64, r: f64, s: f64, params: &AuxParams) -> Result<f64, FlowError> {
    positive_r(r, s, u)?;
    Ok(u_x + params.k() * s * weight(u, r, params.gamma, params.q()))
}

/// `A = γ + rK/(1−rK)`.
pub fn big_a(r: f64, s: f64, params: &AuxParams, chart: &BoundaryChart) -> Result<f64, FlowError> {
    let k = chart.curvature(s);
    Ok(params.gamma + r * k / stretch(r, k, s)?)
}

/// `Ā = γ + τr/(1−rK)`.
pub fn big_abar(r: f64, s: f64, params: &AuxParams, chart: &BoundaryChart) -> Result<f64, FlowError> {
    let k = chart.curvature(s);
    Ok(params.gamma + params.tau() * r / stretch(r, k, s)?)
}

/// The seven terms of `Θ(X)` in order.
pub fn theta_terms(
    x: f64,
    u: f64,
    grad_norm: f64,
    r: f64,
    s: f64,
    params: &AuxParams,
    chart: &BoundaryChart,
) -> Result<[f64; 7], FlowError> {
    if !(u > 0.0) {
        return Err(FlowError::InvalidState(format!("Theta needs u > 0, got {u}")));
    }
    if !(r > 0.0) {
        return Err(FlowError::SingularWeight { r, s });
    }
    let st = stretch(r, chart.curvature(s), s)?;
    let (p, q, k, g) = (params.p(), params.q(), params.k(), params.gamma);
    let rg = r.powf(g);
    let gn = grad_norm;
    Ok([
        -(p - 1.0) * q * gn.powf(p) / u,
        p * k / st * u.powf(q) * gn.powf(p - 2.0) / rg,
        p * gn.powf(p - 1.0) / r * x,
        -q * (q - 1.0) * gn * gn / (u * u),
        2.0 * q / r * (gn / u) * x,
        2.0 * q * k / st * u.powf(q - 1.0) / rg,
        -g * (g + 1.0) / (r * r),
    ])
}

/// `Θ(X)` evaluated literally.
#[allow(non_snake_case)]
pub fn eval_Theta(
    x: f64,
    u: f64,
    grad_norm: f64,
    r: f64,
    s: f64,
    params: &AuxParams,
    chart: &BoundaryChart,
) -> Result<f64, FlowError> {
    Ok(theta_terms(x, u, grad_norm, r, s, params, chart)?.iter().sum())
}

/// `B = r^{(q−1)(2σ − 1/(p−1)) + 2}/(1−rK)`.
pub fn big_b(r: f64, s: f64, params: &AuxParams, chart: &BoundaryChart) -> Result<f64, FlowError> {
    let (p, q, sigma) = (params.p(), params.q(), params.sigma());
    let st = stretch(r, chart.curvature(s), s)?;
    Ok(r.powf((q - 1.0) * (2.0 * sigma - 1.0 / (p - 1.0)) + 2.0) / st)
}

/// The coefficients of `1/r²` and of `|∇u|^p/u` in the upper bound for `Θ(X)`.
pub fn theta_brackets(
    x: f64,
    r: f64,
    s: f64,
    params: &AuxParams,
    chart: &BoundaryChart,
) -> Result<(f64, f64), FlowError> {
    let (p, q, sigma, k, g, l) = (params.p(), params.q(), params.sigma(), params.k(), params.gamma, params.l());
    let b = big_b(r, s, params, chart)?;
    let lsum = p * l.powf(q + p - 2.0) + 2.0 * q * l.powf(q - 1.0);
    let first = k * b * lsum + q / (q - 1.0) * x * x + 0.5 * sigma * x - g * (g + 1.0);
    let second = p * p * x / (2.0 * sigma) * l.powf(p - 1.0) - (p - 1.0) * q;
    Ok((first, second))
}

/// `bracket₁/r² + bracket₂ |∇u|^p/u`.
pub fn theta_upper_bound(
    x: f64,
    u: f64,
    grad_norm: f64,
    r: f64,
    s: f64,
    params: &AuxParams,
    chart: &BoundaryChart,
) -> Result<f64, FlowError> {
    let (b1, b2) = theta_brackets(x, r, s, params, chart)?;
    Ok(b1 / (r * r) + b2 * grad_norm.powf(params.p()) / u)
}

/// `u (s−η)^{2/(q−1)} r^{−(1−2σ)}`.
pub fn profile_bound(u: f64, r: f64, s: f64, params: &AuxParams) -> Result<f64, FlowError> {
    let eta = params.eta();
    if !(s > eta) {
        return Err(FlowError::ProfileUndefined { s, eta });
    }
    if !(r > 0.0) {
        return Err(FlowError::SingularWeight { r, s });
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    Ok(u * (s - eta).powf(2.0 / (params.q() - 1.0)) * r.powf(-(1.0 - 2.0 * params.sigma())))
}

/// Coefficients of the linear equation satisfied by `w = u_s/(1−rK)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WCoefficients {
    pub a_w: f64,
    pub b_w: Point,
}

/// `a_w = K²/(1−rK)² − pK/(1−rK)|∇u|^{p−2}u_r − K′/(1−rK)³ α′/β′` and
/// `b_w = p|∇u|^{p−2}∇u − 2K/(1−rK) N`, from the flow partials `(u_r, u_s)`.
pub fn eval_w_coefficients(
    state: &FlowDerivs,
    r: f64,
    s: f64,
    p: f64,
    chart: &BoundaryChart,
) -> Result<WCoefficients, FlowError> {
    let f = chart.frame(s);
    if !(s > 0.0) || f.t[1] <= 1e-10 {
        return Err(FlowError::DecompositionUndefined { s });
    }
    let st = stretch(r, f.k, s)?;
    let grad = grad_flow(state, r, s, chart)?;
    let gn = grad[0].hypot(grad[1]);
    let gp = if gn == 0.0 { 0.0 } else { gn.powf(p - 2.0) };
    let a_w = f.k * f.k / (st * st) - p * f.k / st * gp * state.psi_r - f.kp / (st * st * st) * f.t[0] / f.t[1];
    let c = 2.0 * f.k / st;
    let b_w = [p * gp * grad[0] - c * f.n[0], p * gp * grad[1] - c * f.n[1]];
    Ok(WCoefficients { a_w, b_w })
}
