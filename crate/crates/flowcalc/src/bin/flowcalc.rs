use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use curvegeom::{build_chart, DomainSpec, PlanarDomain};
use flowcalc::{
    big_a, big_abar, eval_J, eval_Jbar, eval_Theta, grad_flow, laplacian_flow, theta_terms, AuxInputs, AuxParams,
    FlowDerivs,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "flowcalc", about = "Single-point evaluations in boundary coordinates")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    Eval(EvalArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Expr {
    Lap,
    Grad,
    #[value(name = "J")]
    J,
    #[value(name = "Jbar")]
    Jbar,
    Theta,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    expr: Expr,
    /// Preset name, JSON file or inline JSON.
    #[arg(long, default_value = "ellipse")]
    domain: String,
    #[arg(long, default_value_t = 1.0)]
    s0: f64,
    #[arg(long)]
    r: f64,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 0.0)]
    psi_r: f64,
    #[arg(long, default_value_t = 0.0)]
    psi_s: f64,
    #[arg(long, default_value_t = 0.0)]
    psi_rr: f64,
    #[arg(long, default_value_t = 0.0)]
    psi_ss: f64,
    #[arg(long, default_value_t = 0.0)]
    u: f64,
    #[arg(long, default_value_t = 0.0)]
    ux: f64,
    #[arg(long, default_value_t = 0.0)]
    grad_norm: f64,
    /// `A`, `Abar`, or a number.
    #[arg(long, default_value = "A")]
    x: String,
    #[arg(long, default_value_t = 3.0)]
    p: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long, default_value_t = 1.1)]
    q: f64,
    #[arg(long, default_value_t = 0.5)]
    k: f64,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    #[arg(long, default_value_t = 1.0)]
    l: f64,
}

fn run(a: EvalArgs) -> Result<serde_json::Value, String> {
    let spec = DomainSpec::resolve(&a.domain).map_err(|e| e.to_string())?;
    let dom = PlanarDomain::new(spec).map_err(|e| e.to_string())?;
    let chart = build_chart(&dom, a.s0).map_err(|e| e.to_string())?;
    let d = FlowDerivs { psi_r: a.psi_r, psi_s: a.psi_s, psi_rr: a.psi_rr, psi_ss: a.psi_ss, cartesian: None };
    let params = AuxParams::new(AuxInputs {
        p: a.p,
        sigma: a.sigma,
        q: a.q,
        k: a.k,
        eta: a.eta,
        r0: 1.0,
        r1: a.r.max(0.0),
        s1: 0.75 * a.s0,
        k1: chart.max_curvature(),
        tau: chart.tangent_slope_bound(),
        l: a.l,
    })
    .map_err(|e| e.to_string())?;
    let e = |e: flowcalc::FlowError| e.to_string();
    let (r, s) = (a.r, a.s);
    Ok(match a.expr {
        Expr::Lap => json!({ "expr": "lap", "r": r, "s": s, "value": laplacian_flow(&d, r, s, &chart).map_err(e)? }),
        Expr::Grad => json!({ "expr": "grad", "r": r, "s": s, "value": grad_flow(&d, r, s, &chart).map_err(e)? }),
        Expr::J => {
            json!({ "expr": "J", "r": r, "s": s, "value": eval_J(a.u, a.psi_s, r, s, &params, &chart).map_err(e)? })
        }
        Expr::Jbar => {
            json!({ "expr": "Jbar", "r": r, "s": s, "value": eval_Jbar(a.u, a.ux, r, s, &params).map_err(e)? })
        }
        Expr::Theta => {
            let x = match a.x.as_str() {
                "A" => big_a(r, s, &params, &chart).map_err(e)?,
                "Abar" => big_abar(r, s, &params, &chart).map_err(e)?,
                v => v.parse::<f64>().map_err(|err| format!("--x {v}: {err}"))?,
            };
            json!({
                "expr": "theta",
                "r": r,
                "s": s,
                "x": x,
                "gamma": params.gamma(),
                "terms": theta_terms(x, a.u, a.grad_norm, r, s, &params, &chart).map_err(e)?,
                "value": eval_Theta(x, a.u, a.grad_norm, r, s, &params, &chart).map_err(e)?,
            })
        }
    })
}

fn main() -> ExitCode {
    let Cmd::Eval(args) = Cli::parse().cmd;
    match run(args) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
