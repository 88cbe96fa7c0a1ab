//! Run-time monitors for boundary gradient blow-up: flux localization,
//! distance-weighted quotients, sign invariants along the boundary chart,
//! and the run report.

pub mod cli;
pub mod driver;
pub mod monitors;
pub mod record;

pub use driver::{
    bisect_amplitude, default_params, run_monitored, Bisection, Diagnostics, MonitorConfig, Probe, RunConfig,
    RunResult, Setup,
};
pub use monitors::{
    bernstein_quotient, boundary_flux, corner_coefficient, corner_coefficient_reflected, flux_argmax, l_samples,
    mirrored, nondeg_quotient, profile_quotient, sign_monitors, DistanceField, FluxProfile, Pullback, SamplePlan,
    SignMargins,
};
pub use record::{
    invariant_violations, read_records, reread_report, verdict, write_records, write_report, DiagnosticsRecord,
    RunSummary, Verdict,
};

#[derive(Debug, thiserror::Error)]
pub enum DiagError {
    #[error(transparent)]
    Geom(#[from] curvegeom::GeomError),
    #[error(transparent)]
    Hypo(#[from] hypocheck::HypoError),
    #[error(transparent)]
    Flow(#[from] flowcalc::FlowError),
    #[error(transparent)]
    Init(#[from] initdata::InitError),
    #[error(transparent)]
    Solve(#[from] pdesolve::SolveError),
    #[error("monitor: {0}")]
    Monitor(String),
    #[error("report: {0}")]
    Report(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
