//! Monitored runs and the amplitude search.

use std::sync::Arc;

use curvegeom::{DomainSpec, FlowRegion, PlanarDomain, Point};
use flowcalc::{AuxInputs, AuxParams, LEstimates};
use hypocheck::{preset_almost_flat, preset_ellipse, Preset};
use initdata::{make_bump, BumpSpec};
use pdesolve::{run, Event, FieldStats, Grid, GridField, GridSpec, RunOutcome, SimState, StopCriteria, StopReason};
use serde::{Deserialize, Serialize};

use crate::monitors::{
    bernstein_quotient, boundary_flux, corner_coefficient, l_samples, nondeg_quotient, profile_quotient, sign_monitors,
    DistanceField, FluxProfile, SamplePlan, SignMargins,
};
use crate::record::{invariant_violations, DiagnosticsRecord, RunSummary};
use crate::DiagError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonitorConfig {
    /// Steps between samples.
    pub every: u64,
    /// Side of each `(r, s)` sample grid.
    pub samples: usize,
    pub flux_samples: usize,
    /// Depth `δ*` of the Bernstein quotient.
    pub delta_bernstein: f64,
    /// Nondegeneracy ball radius as a fraction of `s0`.
    pub nondeg_radius: f64,
    /// `s₁` as a fraction of `s0`.
    pub s1_frac: f64,
    /// Override for `r₁`.
    pub r1: Option<f64>,
    /// Snapshot time at which `k` is fixed.
    pub t1: f64,
    pub k0: f64,
    /// Jitter of the sample points.
    pub seed: Option<u64>,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            every: pdesolve::solver::MONITOR_EVERY,
            samples: 40,
            flux_samples: crate::monitors::FLUX_SAMPLES,
            delta_bernstein: 0.1,
            nondeg_radius: 0.05,
            s1_frac: 0.5,
            r1: None,
            t1: 0.0,
            k0: 0.5,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Preset name, JSON file or inline JSON.
    pub domain: String,
    pub p: f64,
    pub eps: f64,
    pub rho: f64,
    pub amp: f64,
    pub c1: f64,
    /// Grid spacing; `eps/8` by default.
    pub h: Option<f64>,
    pub m_stop: f64,
    pub t_end: f64,
    pub past_peak: Option<f64>,
    pub max_steps: Option<u64>,
    /// Largest number of amplitude probes.
    pub probes: usize,
    /// Non-triggering probes end once `max|∇u|` drops to this fraction of its peak.
    pub probe_past_peak: f64,
    pub monitor: MonitorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: "ellipse".into(),
            p: 3.0,
            eps: 0.05,
            rho: 0.4,
            amp: 1.0,
            c1: 0.0,
            h: None,
            m_stop: 1e3,
            t_end: 1.0,
            past_peak: None,
            max_steps: None,
            probes: 8,
            probe_past_peak: 0.99,
            monitor: MonitorConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn bump(&self, amp: f64) -> BumpSpec {
        BumpSpec { base: [0.0, 0.0], rho: self.rho, eps: self.eps, c1: self.c1, c2: amp, p: self.p }
    }
    pub fn stop(&self) -> StopCriteria {
        let mut s = StopCriteria::new(self.t_end, self.m_stop);
        s.past_peak = self.past_peak;
        s.max_steps = self.max_steps;
        s
    }
}

/// Domain, certified chart and grid of a case.
pub struct Setup {
    pub spec: DomainSpec,
    pub preset: Preset,
    pub region: FlowRegion,
    pub grid: Arc<Grid>,
    pub dist: Arc<DistanceField>,
}

/// Ellipses use their preset; every other domain the almost-flat one.
pub fn preset_for(spec: &DomainSpec) -> Result<Preset, DiagError> {
    Ok(match *spec {
        DomainSpec::Ellipse { a, b } => preset_ellipse(a, b)?,
        _ => preset_almost_flat(spec.clone())?,
    })
}

impl Setup {
    pub fn new(cfg: &RunConfig) -> Result<Self, DiagError> {
        let spec = DomainSpec::resolve(&cfg.domain)?;
        Self::with_spacing(spec, cfg.h.unwrap_or(cfg.eps / 8.0))
    }

    pub fn with_spacing(spec: DomainSpec, h: f64) -> Result<Self, DiagError> {
        let preset = preset_for(&spec)?;
        let grid = Arc::new(Grid::build(&preset.domain, h)?);
        Ok(Self::assemble(spec, preset, grid))
    }

    /// Rebuilds the stored grid of a snapshot.
    pub fn with_grid(spec: DomainSpec, grid: GridSpec) -> Result<Self, DiagError> {
        let preset = preset_for(&spec)?;
        let grid = Arc::new(Grid::from_spec(&preset.domain, grid)?);
        Ok(Self::assemble(spec, preset, grid))
    }

    fn assemble(spec: DomainSpec, preset: Preset, grid: Arc<Grid>) -> Self {
        let region = FlowRegion::new(preset.chart.clone(), Some(preset.y0));
        let dist = Arc::new(DistanceField::new(&grid, &preset.domain));
        Setup { spec, preset, region, grid, dist }
    }

    pub fn domain(&self) -> &PlanarDomain {
        &self.preset.domain
    }

    pub fn bump(&self, cfg: &RunConfig, amp: f64) -> Result<GridField, DiagError> {
        Ok(make_bump(cfg.bump(amp), self.domain(), self.grid.clone())?)
    }
}

/// `σ = min(0.1, 0.4/(2(p−1)))`, `q = 1.1`, `η = 0.05 s0`, and the geometric
/// constants of the chart.
pub fn default_params(p: f64, region: &FlowRegion, k: f64, r1: f64, s1: f64, l: f64) -> Result<AuxParams, DiagError> {
    let chart = &region.chart;
    let s0 = chart.s0;
    let n = 200;
    let r0 = (0..=n).map(|i| region.rmax(s0 * i as f64 / n as f64)).fold(f64::INFINITY, f64::min);
    Ok(AuxParams::new(AuxInputs {
        p,
        sigma: 0.1f64.min(0.4 / (2.0 * (p - 1.0))),
        q: 1.1,
        k,
        eta: 0.05 * s0,
        r0,
        r1,
        s1,
        k1: chart.max_curvature().max(0.0),
        tau: chart.tangent_slope_bound(),
        l,
    })?)
}

/// Monitor state of a run.
pub struct Diagnostics {
    pub cfg: MonitorConfig,
    pub region: FlowRegion,
    pub plan: SamplePlan,
    pub dist: Arc<DistanceField>,
    pub params: AuxParams,
    pub p: f64,
    /// `‖∇u₀‖∞`.
    pub c2_0: f64,
    /// `‖u₀‖∞ + ‖∇u₀‖∞`.
    pub u0_c1: f64,
    pub base: Point,
    pub records: Vec<DiagnosticsRecord>,
    pub margins: Vec<SignMargins>,
    pub advisories: Vec<String>,
    pub last_flux: Option<FluxProfile>,
    k_fixed: bool,
}

impl Diagnostics {
    pub fn new(
        u0: &GridField,
        domain: &PlanarDomain,
        region: FlowRegion,
        dist: Arc<DistanceField>,
        p: f64,
        cfg: MonitorConfig,
    ) -> Result<Self, DiagError> {
        let g = &u0.grid;
        let h = g.h();
        let s0 = region.s0();
        let s1 = cfg.s1_frac * s0;
        let stats = FieldStats::of(u0);
        let mut advisories = Vec::new();
        // r₁ from the hypotheses, widened to a resolvable band.
        let probe = default_params(p, &region, cfg.k0, 0.0, s1, 0.0)?;
        let coarse = SamplePlan::new(&region, domain, cfg.samples, h, 8.0 * h, s1, probe.eta(), None);
        let l = LEstimates::from_samples(l_samples(u0, &coarse), p, probe.q()).max();
        let bound = default_params(p, &region, cfg.k0, 0.0, s1, l)?.report().suggested_r1_max;
        let r1 = cfg.r1.unwrap_or(bound.max(8.0 * h));
        if r1 > bound {
            advisories.push(format!("r1 = {r1:.3e} exceeds the admissible {bound:.3e}"));
        }
        let params = default_params(p, &region, cfg.k0, r1, s1, l)?;
        if !params.hyp_gamma_ok() {
            advisories.push(format!(
                "gamma = {} violates its bound {:.3e}",
                params.gamma(),
                params.report().gamma_bound
            ));
        }
        let plan = SamplePlan::new(&region, domain, cfg.samples, h, r1, s1, params.eta(), cfg.seed);
        Ok(Diagnostics {
            region,
            plan,
            dist,
            params,
            p,
            c2_0: stats.max_grad,
            u0_c1: stats.max_u + stats.max_grad,
            base: [0.0, 0.0],
            records: Vec::new(),
            margins: Vec::new(),
            advisories,
            last_flux: None,
            k_fixed: false,
            cfg,
        })
    }

    /// Halves `k` until `J` and `J̄` are nonpositive on the snapshot, up to
    /// a numerical zero.
    fn fix_k(&mut self, u: &GridField) -> Result<(), DiagError> {
        let chart = &self.region.chart;
        let tol = 1e-9 * self.u0_c1.max(f64::MIN_POSITIVE);
        let mut params = self.params.clone();
        for _ in 0..64 {
            let m = sign_monitors(u, &self.plan, chart, &params);
            if m.j >= -tol && m.jbar >= -tol {
                self.params = params;
                self.k_fixed = true;
                return Ok(());
            }
            let k = 0.5 * params.k();
            params = params.with(|i| i.k = k)?;
        }
        self.advisories.push(format!("k shrink stopped at {:.3e} without J, Jbar <= 0", params.k()));
        self.params = params;
        self.k_fixed = true;
        Ok(())
    }

    pub fn observe(&mut self, st: &SimState) -> Result<DiagnosticsRecord, DiagError> {
        let u = &st.u;
        if !self.k_fixed && st.t >= self.cfg.t1 {
            self.fix_k(u)?;
        }
        let chart = &self.region.chart;
        let flux = boundary_flux(u, chart, self.cfg.flux_samples);
        let m = sign_monitors(u, &self.plan, chart, &self.params);
        let radius = self.cfg.nondeg_radius * self.region.s0();
        let rec = DiagnosticsRecord {
            t: st.t,
            dt: st.dt,
            max_u: st.stats.max_u,
            max_grad: st.stats.max_grad,
            flux_argmax_s: flux.argmax_s,
            flux_at_origin: flux.at_origin,
            margin_ux: m.ux,
            margin_us: m.us,
            margin_j: m.j,
            margin_jbar: m.jbar,
            bernstein_c1_est: bernstein_quotient(u, &self.dist, self.c2_0, self.p, self.cfg.delta_bernstein)
                .unwrap_or(f64::NAN),
            nondeg_quotient_max: nondeg_quotient(u, &self.dist, self.base, radius, self.p)?,
            corner_coeff: corner_coefficient(u, &self.plan),
            profile_bound_quotient: profile_quotient(u, &self.plan, &self.params),
            min_u: st.stats.min_u,
            mirror_defect: u.mirror_defect(),
        };
        self.records.push(rec);
        self.margins.push(m);
        self.last_flux = Some(flux);
        Ok(rec)
    }

    /// Nondegeneracy quotient in balls around `γ(s)`.
    pub fn nondeg_at(&self, u: &GridField, s: f64) -> Result<f64, DiagError> {
        let c = self.region.chart.gamma(s);
        nondeg_quotient(u, &self.dist, c, self.cfg.nondeg_radius * self.region.s0(), self.p)
    }
}

pub struct RunResult {
    pub outcome: RunOutcome,
    pub summary: RunSummary,
    pub diagnostics: Diagnostics,
    pub state: SimState,
    pub events: Vec<Event>,
}

/// Runs `u0` to a stop criterion with monitors every `cfg.monitor.every` steps.
pub fn run_monitored(
    setup: &Setup,
    cfg: &RunConfig,
    u0: GridField,
    stop: StopCriteria,
) -> Result<RunResult, DiagError> {
    let mut diag =
        Diagnostics::new(&u0, setup.domain(), setup.region.clone(), setup.dist.clone(), cfg.p, cfg.monitor.clone())?;
    let mut state = SimState::new(u0, cfg.p, stop)?;
    let mut err = None;
    let outcome = run(&mut state, cfg.monitor.every, |s| {
        if err.is_none() {
            if let Err(e) = diag.observe(s) {
                err = Some(e);
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let flux_peak_ratio = diag.last_flux.as_ref().map_or(0.0, FluxProfile::peak_ratio);
    let summary = RunSummary {
        stop_reason: Some(outcome.reason),
        steps: outcome.steps,
        t: outcome.t,
        t_end: stop.t_end,
        m_stop: stop.m_stop,
        s0: setup.region.s0(),
        flux_peak_ratio,
        advisories: diag.advisories.clone(),
        extra: serde_json::json!({
            "p": cfg.p,
            "h": setup.grid.h(),
            "k": diag.params.k(),
            "r1": diag.plan.r1,
            "s1": diag.plan.s1,
            "feasibility": diag.params.report(),
        }),
    };
    let events = state.events.clone();
    Ok(RunResult { outcome, summary, diagnostics: diag, state, events })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub amp: f64,
    pub reason: StopReason,
    pub steps: u64,
    pub t: f64,
    pub peak_grad: f64,
    /// Hard-invariant violations of the probe's series.
    pub violations: Vec<String>,
    /// Largest mirror defect of the series over `‖u₀‖∞`.
    pub mirror_defect: f64,
}

pub struct Bisection {
    pub probes: Vec<Probe>,
    /// Largest amplitude whose initial gradient stays below `M_stop`.
    pub amp_hi: f64,
    pub accepted: Option<(f64, RunResult)>,
}

/// Bisection on the bump amplitude in `(0, a_hi)`, where `a_hi` puts
/// `‖∇u₀‖∞` at `M_stop`. A probe that reaches `M_stop` (or `dt` underflow)
/// is accepted; one that peaks below it raises the lower end.
pub fn bisect_amplitude(setup: &Setup, cfg: &RunConfig) -> Result<Bisection, DiagError> {
    let unit = setup.bump(cfg, 1.0)?;
    let g1 = FieldStats::of(&unit).max_grad;
    let amp_hi = cfg.m_stop / g1;
    let (mut lo, hi) = (0.0, amp_hi);
    let mut probes = Vec::new();
    for _ in 0..cfg.probes {
        let amp = 0.5 * (lo + hi);
        let mut stop = cfg.stop();
        stop.past_peak = Some(cfg.probe_past_peak);
        let res = run_monitored(setup, cfg, setup.bump(cfg, amp)?, stop)?;
        let reason = res.outcome.reason;
        let recs = &res.diagnostics.records;
        let u0 = recs.first().map_or(1.0, |r| r.max_u);
        probes.push(Probe {
            amp,
            reason,
            steps: res.outcome.steps,
            t: res.outcome.t,
            peak_grad: res.state.peak_grad,
            violations: invariant_violations(recs),
            mirror_defect: recs.iter().map(|r| r.mirror_defect).fold(0.0, f64::max) / u0,
        });
        if matches!(reason, StopReason::MStop | StopReason::DtUnderflow) {
            return Ok(Bisection { probes, amp_hi, accepted: Some((amp, res)) });
        }
        lo = amp;
    }
    Ok(Bisection { probes, amp_hi, accepted: None })
}
