//! Explicit time stepping of `u_t − Δu = |∇u|^p` with zero Dirichlet data.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::GridField;
use crate::ops::{pow_half, pow_p, Regular, Stencil};
use crate::SolveError;

pub const CFL_SAFETY: f64 = 0.4;
pub const DT_MIN: f64 = 1e-14;
pub const MONITOR_EVERY: u64 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StopCriteria {
    pub t_end: f64,
    /// Threshold on `max|∇_h u|`.
    pub m_stop: f64,
    pub dt_min: f64,
    /// Stop once `max u` falls to this level (used when scanning amplitudes).
    pub decay_below: Option<f64>,
    /// Stop once `max|∇_h u|` has fallen to this fraction (< 1) of the peak
    /// it reached after its lowest value so far.
    pub past_peak: Option<f64>,
    pub max_steps: Option<u64>,
}

impl StopCriteria {
    pub fn new(t_end: f64, m_stop: f64) -> Self {
        StopCriteria { t_end, m_stop, dt_min: DT_MIN, decay_below: None, past_peak: None, max_steps: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    TEnd,
    MStop,
    /// `dt < dt_min`: the blow-up truncation event.
    DtUnderflow,
    Decayed,
    PastPeak,
    MaxSteps,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub step: u64,
    pub t: f64,
    pub kind: String,
    pub detail: String,
}

/// Reductions over the current field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FieldStats {
    pub max_u: f64,
    pub min_u: f64,
    /// `max|∇_h u|` with one-sided gradients at cut cells.
    pub max_grad: f64,
    /// Largest upwind gradient norm, which sets the CFL bound.
    pub max_upwind: f64,
}

impl FieldStats {
    fn empty() -> Self {
        FieldStats { max_u: 0.0, min_u: f64::INFINITY, max_grad: 0.0, max_upwind: 0.0 }
    }

    fn merge(a: Self, b: Self) -> Self {
        FieldStats {
            max_u: a.max_u.max(b.max_u),
            min_u: a.min_u.min(b.min_u),
            max_grad: a.max_grad.max(b.max_grad),
            max_upwind: a.max_upwind.max(b.max_upwind),
        }
    }

    pub fn of(u: &GridField) -> Self {
        let mut rhs = vec![0.0; u.values.len()];
        rhs_pass(u, 2.0, false, &mut rhs)
    }
}

/// Writes the right-hand side `Δ_h u (+ |∇u|^p)` at every evolved node and
/// returns the statistics of `u`, both from a single sweep.
fn rhs_pass(u: &GridField, p: f64, source: bool, rhs: &mut [f64]) -> FieldStats {
    let g = &u.grid;
    let nx = g.nx();
    let vals = &u.values[..];
    let h = g.h();
    let (inv_h2, inv_4h2) = (1.0 / (h * h), 0.25 / (h * h));
    // Squared norms are accumulated and rooted at the end.
    let mut s = rhs
        .par_chunks_mut(nx)
        .enumerate()
        .map(|(j, out)| {
            let base = j * nx;
            let plan = g.row_plan(j);
            let mut s = FieldStats::empty();
            let (mut gm, mut um) = (0.0f64, 0.0f64);
            for &(a, b) in &plan.runs {
                for k in a..b {
                    let st = Regular::gather(vals, k, nx);
                    let up2 = st.upwind_sq_h2();
                    let mut r = st.laplacian_h2() * inv_h2;
                    if source {
                        r += pow_half(up2 * inv_h2, p);
                    }
                    out[k - base] = r;
                    s.max_u = s.max_u.max(st.c);
                    s.min_u = s.min_u.min(st.c);
                    gm = gm.max(st.grad_sq_4h2());
                    um = um.max(up2);
                }
            }
            s.max_grad = gm * inv_4h2;
            s.max_upwind = um * inv_h2;
            for &k in &plan.cut {
                let st = Stencil::gather(g, vals, k, None);
                let up = st.upwind_norm();
                let mut r = st.laplacian();
                if source {
                    r += pow_half(up * up, p);
                }
                out[k - base] = r;
                let [gx, gy] = st.gradient();
                s.max_u = s.max_u.max(st.c);
                s.min_u = s.min_u.min(st.c);
                s.max_grad = s.max_grad.max(gx * gx + gy * gy);
                s.max_upwind = s.max_upwind.max(up * up);
            }
            // Interpolated nodes count toward the extrema of u.
            for &k in &plan.interpolated {
                let v = vals[k];
                s.max_u = s.max_u.max(v);
                s.min_u = s.min_u.min(v);
            }
            s
        })
        .reduce(FieldStats::empty, FieldStats::merge);
    s.max_grad = s.max_grad.sqrt();
    s.max_upwind = s.max_upwind.sqrt();
    s
}

#[derive(Clone, Debug)]
pub struct SimState {
    pub u: GridField,
    pub t: f64,
    /// Step size of the last update (0 before the first).
    pub dt: f64,
    pub steps: u64,
    pub p: f64,
    /// `false` drops the gradient term (linear heat equation).
    pub source: bool,
    pub stop: StopCriteria,
    pub events: Vec<Event>,
    pub stats: FieldStats,
    /// Running minimum of `stats.max_grad`, and its largest value since then.
    pub trough_grad: f64,
    pub peak_grad: f64,
    /// Right-hand side at the current `u`.
    rhs: Vec<f64>,
}

impl SimState {
    pub fn new(u: GridField, p: f64, stop: StopCriteria) -> Result<Self, SolveError> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(SolveError::InvalidState(format!("p = {p}")));
        }
        if let Some(k) = u.values.iter().position(|v| !v.is_finite()) {
            return Err(SolveError::NonFinite { step: 0, t: 0.0, node: k, point: u.grid.point(k) });
        }
        let rhs = vec![0.0; u.values.len()];
        let mut s = SimState {
            u,
            t: 0.0,
            dt: 0.0,
            steps: 0,
            p,
            source: true,
            stop,
            events: Vec::new(),
            stats: FieldStats::empty(),
            trough_grad: f64::INFINITY,
            peak_grad: 0.0,
            rhs,
        };
        s.refresh();
        Ok(s)
    }

    pub fn linear(mut self) -> Self {
        self.source = false;
        self.refresh();
        self
    }

    /// Recomputes `stats` and the right-hand side; call after editing `u`.
    pub fn refresh(&mut self) {
        self.stats = rhs_pass(&self.u, self.p, self.source, &mut self.rhs);
        let g = self.stats.max_grad;
        if g < self.trough_grad {
            self.trough_grad = g;
            self.peak_grad = g;
        } else {
            self.peak_grad = self.peak_grad.max(g);
        }
    }

    /// `cfl · min(1/Σ, h/(p·G^{p−1} + 1e−12))` where `Σ` is the largest
    /// stencil diagonal (`4/h²` on an uncut grid) and `G` the upwind slope.
    pub fn cfl_dt(&self) -> f64 {
        let g = &self.u.grid;
        let diff = 1.0 / g.coef_max();
        if !self.source {
            return CFL_SAFETY * diff;
        }
        let adv = g.h() / (self.p * pow_p(self.stats.max_upwind, self.p - 1.0) + 1e-12);
        CFL_SAFETY * diff.min(adv)
    }

    fn log(&mut self, kind: &str, detail: String) {
        self.events.push(Event { step: self.steps, t: self.t, kind: kind.to_string(), detail });
    }
}

/// One explicit update with the CFL step, clipped to land on `t_end`.
pub fn step(state: &mut SimState) -> Result<(), SolveError> {
    let mut dt = state.cfl_dt();
    if dt < state.stop.dt_min {
        return Err(SolveError::DtUnderflow { dt, t: state.t });
    }
    let rest = state.stop.t_end - state.t;
    if rest > 0.0 && rest < dt {
        dt = rest;
    }
    let grid = state.u.grid.clone();
    let rhs = &state.rhs;
    let vals = &mut state.u.values;
    for &k in grid.evolved() {
        vals[k] += dt * rhs[k];
    }
    if let Some(&k) = grid.evolved().iter().find(|&&k| !vals[k].is_finite()) {
        return Err(SolveError::NonFinite { step: state.steps + 1, t: state.t + dt, node: k, point: grid.point(k) });
    }
    state.u.apply_links(None);
    state.t += dt;
    if rest > 0.0 && dt == rest {
        state.t = state.stop.t_end;
    }
    state.dt = dt;
    state.steps += 1;
    state.refresh();
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunOutcome {
    pub reason: StopReason,
    pub steps: u64,
    pub t: f64,
}

/// Step until a stop criterion fires. `monitor` sees the initial state,
/// every `every`-th step and the final state; it only gets a shared borrow.
pub fn run<F: FnMut(&SimState)>(state: &mut SimState, every: u64, mut monitor: F) -> Result<RunOutcome, SolveError> {
    let every = every.max(1);
    monitor(state);
    let reason = loop {
        if let Some(r) = check_stop(state) {
            break r;
        }
        match step(state) {
            Ok(()) => {}
            Err(SolveError::DtUnderflow { dt, .. }) => {
                let msg = format!("dt = {dt:e} with max|grad u| = {}", state.stats.max_grad);
                state.log("blow-up truncation", msg);
                break StopReason::DtUnderflow;
            }
            Err(e) => {
                state.log("abort", e.to_string());
                return Err(e);
            }
        }
        if state.steps.is_multiple_of(every) {
            monitor(state);
        }
    };
    if !state.steps.is_multiple_of(every) {
        monitor(state);
    }
    let detail = format!("max u = {}, max|grad u| = {}", state.stats.max_u, state.stats.max_grad);
    state.log(&format!("stop: {reason:?}"), detail);
    Ok(RunOutcome { reason, steps: state.steps, t: state.t })
}

fn check_stop(state: &SimState) -> Option<StopReason> {
    let s = &state.stop;
    if state.stats.max_grad >= s.m_stop {
        return Some(StopReason::MStop);
    }
    if state.t >= s.t_end {
        return Some(StopReason::TEnd);
    }
    if s.decay_below.is_some_and(|d| state.stats.max_u <= d) {
        return Some(StopReason::Decayed);
    }
    if s.past_peak.is_some_and(|f| state.stats.max_grad <= f * state.peak_grad) {
        return Some(StopReason::PastPeak);
    }
    if s.max_steps.is_some_and(|m| state.steps >= m) {
        return Some(StopReason::MaxSteps);
    }
    None
}
