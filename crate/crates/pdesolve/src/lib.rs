//! Finite-difference solver for `u_t − Δu = |∇u|^p` on curved domains.
//!
//! Domains are embedded in a Cartesian [`Grid`]; nodes next to the boundary
//! use Shortley–Weller arms ending exactly on it. The gradient term is
//! discretized by an upwind rule that keeps the explicit update monotone, so
//! positivity and `max u` decay hold for the discrete solution itself.

pub mod grid;
pub mod harness;
pub mod ops;
pub mod poisson;
pub mod snapshot;
pub mod solver;

pub use grid::{Geometry, Grid, GridField, GridSpec, Link, NodeKind, Rect, RowPlan, ScalarField};
pub use harness::{heat_harness, HeatResult};
pub use poisson::{
    comparison_check, comparison_margin, cutoff_data, glue, solve_poisson, MarginSample, PoissonSolution,
};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotHeader};
pub use solver::{run, step, Event, FieldStats, RunOutcome, SimState, StopCriteria, StopReason};

use curvegeom::Point;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("dt = {dt:e} below the underflow threshold at t = {t}")]
    DtUnderflow { dt: f64, t: f64 },
    #[error("non-finite value at node {node} ({point:?}) in step {step}, t = {t}")]
    NonFinite { step: u64, t: f64, node: usize, point: Point },
    #[error("Poisson iteration stalled after {sweeps} sweeps: residual {residual:e} vs |rhs| {rhs_norm:e}")]
    PoissonNotConverged { residual: f64, rhs_norm: f64, sweeps: usize },
    #[error("snapshot: {0}")]
    Snapshot(String),
}
