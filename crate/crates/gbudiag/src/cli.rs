//! The `gbudiag` command line.

use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use curvegeom::{build_chart, DomainSpec, PlanarDomain};
use hypocheck::check_all;
use initdata::cli::{mkinit, MkinitArgs};
use pdesolve::{cutoff_data, read_snapshot, solve_poisson, write_snapshot, Grid, GridField, SnapshotHeader};

use crate::driver::{bisect_amplitude, preset_for, run_monitored, RunConfig, RunResult, Setup};
use crate::record::{reread_report, write_report, Verdict};
use crate::DiagError;

#[derive(Parser, Debug)]
#[command(name = "gbudiag", about = "Boundary gradient blow-up experiments and diagnostics")]
pub struct Cli {
    /// Run configuration as a JSON file or inline JSON; flags override it.
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the jitter of the monitor sample points.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (all cores by default).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Tabulate the boundary chart as CSV `s,x,y,curvature`.
    Chart {
        #[arg(long, default_value = "ellipse")]
        domain: String,
        /// Defaults to the certified half-width of the preset.
        #[arg(long)]
        s0: Option<f64>,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Check the geometric hypotheses; exit code 1 when one fails.
    Check {
        #[arg(long, default_value = "ellipse")]
        domain: String,
        #[arg(long)]
        s0: Option<f64>,
        /// A number or `inf`; defaults to the preset value.
        #[arg(long)]
        y0: Option<String>,
    },
    /// Write a bump as a grid snapshot (to `--out`, default `u0.snap`).
    Mkinit(InitArgs),
    /// Monitored run; bisects the amplitude unless `--amp` or `--init` is given.
    Run(RunArgs),
    /// Solve `−Δψ = 1` with boundary cutoff data and write `ψ`.
    Poisson {
        #[arg(long, default_value = "ellipse")]
        domain: String,
        #[arg(long, default_value_t = 0.4)]
        rho: f64,
        #[arg(long, default_value_t = 0.025)]
        h: f64,
        #[arg(long, default_value_t = 3.0)]
        p: f64,
    },
    /// Recompute the verdict of a run directory; exit code 1 on violations.
    Report { dir: PathBuf },
}

#[derive(Args, Debug)]
pub struct InitArgs {
    #[arg(long, default_value = "ellipse")]
    pub domain: String,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.4)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub amp: f64,
    #[arg(long, default_value_t = 0.0)]
    pub c1: f64,
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    #[arg(long)]
    pub h: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    #[arg(long)]
    pub domain: Option<String>,
    /// Start from a snapshot instead of a bump.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub amp: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub mstop: Option<f64>,
    #[arg(long)]
    pub tend: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Steps between monitor samples.
    #[arg(long)]
    pub every: Option<u64>,
}

impl RunArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = &self.domain {
            cfg.domain = v.clone();
        }
        macro_rules! set {
            ($($f:ident => $($t:ident).+),*) => { $(if let Some(v) = self.$f { cfg.$($t).+ = v; })* };
        }
        set!(p => p, eps => eps, rho => rho, amp => amp, mstop => m_stop, tend => t_end, every => monitor.every);
        if self.h.is_some() {
            cfg.h = self.h;
        }
        if self.max_steps.is_some() {
            cfg.max_steps = self.max_steps;
        }
    }
}

pub fn load_config(arg: Option<&str>) -> Result<RunConfig, DiagError> {
    let Some(arg) = arg else {
        return Ok(RunConfig::default());
    };
    let text = if arg.trim_start().starts_with('{') { arg.to_string() } else { std::fs::read_to_string(arg)? };
    Ok(serde_json::from_str(&text)?)
}

fn parse_y0(v: &str) -> Result<f64, DiagError> {
    match v {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        _ => v.parse().map_err(|e| DiagError::Report(format!("--y0 {v}: {e}"))),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), DiagError> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn finish(dir: &Path, res: &RunResult) -> Result<Verdict, DiagError> {
    let v = write_report(dir, &res.summary, &res.diagnostics.records)?;
    let header = SnapshotHeader {
        grid: res.state.u.grid.spec,
        t: res.state.t,
        p: Some(res.state.p),
        provenance: serde_json::json!({ "stop": res.summary.stop_reason, "steps": res.summary.steps }),
    };
    write_snapshot(std::io::BufWriter::new(std::fs::File::create(dir.join("final.snap"))?), &header, &res.state.u)?;
    Ok(v)
}

fn run_cmd(cli: &Cli, args: &RunArgs) -> Result<bool, DiagError> {
    let mut cfg = load_config(cli.config.as_deref())?;
    args.apply(&mut cfg);
    if cli.seed.is_some() {
        cfg.monitor.seed = cli.seed;
    }
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("runs/latest"));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&cfg)?)?;
    let spec = DomainSpec::resolve(&cfg.domain)?;
    let res = if let Some(path) = &args.init {
        let (header, values) = read_snapshot(BufReader::new(std::fs::File::open(path)?))?;
        if let Some(p) = header.p.filter(|_| args.p.is_none()) {
            cfg.p = p;
        }
        let setup = Setup::with_grid(spec, header.grid)?;
        let u0 = GridField::from_values(setup.grid.clone(), values)?;
        run_monitored(&setup, &cfg, u0, cfg.stop())?
    } else {
        let setup = Setup::new(&cfg)?;
        if args.amp.is_some() {
            run_monitored(&setup, &cfg, setup.bump(&cfg, cfg.amp)?, cfg.stop())?
        } else {
            let b = bisect_amplitude(&setup, &cfg)?;
            let probes = serde_json::json!({ "amp_hi": b.amp_hi, "probes": b.probes });
            std::fs::write(dir.join("probes.json"), serde_json::to_string_pretty(&probes)?)?;
            for p in &b.probes {
                eprintln!("amp {:.6}: {:?} after {} steps, peak |grad u| {:.2}", p.amp, p.reason, p.steps, p.peak_grad);
            }
            match b.accepted {
                Some((_, res)) => res,
                None => return Err(DiagError::Report(format!("no amplitude below {} reached M_stop", b.amp_hi))),
            }
        }
    };
    let v = finish(&dir, &res)?;
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(v.invariant_violations.is_empty())
}

fn dispatch(cli: &Cli) -> Result<bool, DiagError> {
    match &cli.cmd {
        Cmd::Chart { domain, s0, samples } => {
            let spec = DomainSpec::resolve(domain)?;
            let chart = match s0 {
                Some(s0) => build_chart(&PlanarDomain::new(spec)?, *s0)?,
                None => preset_for(&spec)?.chart,
            };
            let n = (*samples).max(2);
            let mut text = String::from("s,x,y,curvature\n");
            for i in 0..n {
                let s = -chart.s0 + 2.0 * chart.s0 * i as f64 / (n - 1) as f64;
                let g = chart.gamma(s);
                text.push_str(&format!("{s},{},{},{}\n", g[0], g[1], chart.curvature(s)));
            }
            emit(cli.out.as_deref(), &text)?;
            Ok(true)
        }
        Cmd::Check { domain, s0, y0 } => {
            let spec = DomainSpec::resolve(domain)?;
            let (dom, chart, y0) = match (s0, y0) {
                (Some(s0), Some(y0)) => {
                    let dom = PlanarDomain::new(spec)?;
                    let chart = build_chart(&dom, *s0)?;
                    (dom, chart, parse_y0(y0)?)
                }
                _ => {
                    let pre = preset_for(&spec)?;
                    let chart = match s0 {
                        Some(s0) => build_chart(&pre.domain, *s0)?,
                        None => pre.chart,
                    };
                    let y0 = y0.as_deref().map(parse_y0).transpose()?.unwrap_or(pre.y0);
                    (pre.domain, chart, y0)
                }
            };
            let rep = check_all(&dom, &chart, y0);
            emit(cli.out.as_deref(), &format!("{}\n", rep.to_json()))?;
            eprint!("{}", rep.table());
            Ok(rep.pass)
        }
        Cmd::Mkinit(a) => {
            let args = MkinitArgs {
                domain: a.domain.clone(),
                eps: a.eps,
                rho: a.rho,
                amp: a.amp,
                c1: a.c1,
                p: a.p,
                h: a.h,
                out: cli.out.clone().unwrap_or_else(|| PathBuf::from("u0.snap")),
            };
            let header = mkinit(&args).map_err(DiagError::Report)?;
            println!("{}", serde_json::to_string_pretty(&header)?);
            Ok(true)
        }
        Cmd::Run(a) => run_cmd(cli, a),
        Cmd::Poisson { domain, rho, h, p } => {
            let dom = PlanarDomain::new(DomainSpec::resolve(domain)?)?;
            let grid = Arc::new(Grid::build(&dom, *h)?);
            let sol = solve_poisson(grid.clone(), cutoff_data([0.0, 0.0], *rho))?;
            let summary = serde_json::json!({
                "grad_max": sol.grad_max(),
                "c2": sol.default_c2(*p),
                "residual": sol.residual,
                "sweeps": sol.sweeps,
            });
            let path = cli.out.clone().unwrap_or_else(|| PathBuf::from("psi.snap"));
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            let header = SnapshotHeader { grid: grid.spec, t: 0.0, p: Some(*p), provenance: summary.clone() };
            write_snapshot(std::io::BufWriter::new(std::fs::File::create(&path)?), &header, &sol.psi)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(true)
        }
        Cmd::Report { dir } => {
            let v = reread_report(dir)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            for e in &v.invariant_violations {
                eprintln!("violation: {e}");
            }
            Ok(v.invariant_violations.is_empty())
        }
    }
}

/// Exit code 0 on success, 1 when a check fails or an invariant is
/// violated, 2 on errors.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
