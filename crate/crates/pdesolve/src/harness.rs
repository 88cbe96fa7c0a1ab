//! Linear heat equation on the unit square, where the exact solution is known.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::grid::{Grid, GridField, Rect};
use crate::solver::{run, SimState, StopCriteria};
use crate::SolveError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeatResult {
    pub n: usize,
    pub t: f64,
    pub max_u: f64,
    pub exact: f64,
    pub error: f64,
    pub steps: u64,
}

/// `u₀ = sin πx sin πy` on an `n × n` cell grid, heat flow to `t_end`;
/// compares `max u` with `e^{−2π²t}`.
pub fn heat_harness(n: usize, t_end: f64) -> Result<HeatResult, SolveError> {
    let grid = Arc::new(Grid::build(&Rect::unit(), 1.0 / n as f64)?);
    let u0 = GridField::from_fn(grid, |p| (PI * p[0]).sin() * (PI * p[1]).sin());
    let mut st = SimState::new(u0, 2.0, StopCriteria::new(t_end, f64::INFINITY))?.linear();
    run(&mut st, u64::MAX, |_| {})?;
    let exact = (-2.0 * PI * PI * st.t).exp();
    let max_u = st.stats.max_u;
    Ok(HeatResult { n, t: st.t, max_u, exact, error: (max_u - exact).abs(), steps: st.steps })
}
