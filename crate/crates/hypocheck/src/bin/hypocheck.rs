use std::process::ExitCode;

use clap::{Parser, Subcommand};
use curvegeom::{build_chart, DomainSpec, PlanarDomain};
use hypocheck::check_all;

#[derive(Parser)]
#[command(name = "hypocheck", about = "Sampled checks of the geometric hypotheses")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate all conditions; prints the JSON report, then a table on stderr.
    Check {
        /// Preset name, JSON file or inline JSON.
        #[arg(long)]
        domain: String,
        #[arg(long)]
        s0: f64,
        /// A number or `inf`.
        #[arg(long, default_value = "inf")]
        y0: String,
    },
}

fn parse_y0(v: &str) -> Result<f64, String> {
    match v {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        _ => v.parse::<f64>().map_err(|e| format!("--y0 {v}: {e}")),
    }
}

fn main() -> ExitCode {
    let Cmd::Check { domain, s0, y0 } = Cli::parse().cmd;
    let run = || -> Result<bool, String> {
        let y0 = parse_y0(&y0)?;
        let dom =
            PlanarDomain::new(DomainSpec::resolve(&domain).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let chart = build_chart(&dom, s0).map_err(|e| e.to_string())?;
        let rep = check_all(&dom, &chart, y0);
        println!("{}", rep.to_json());
        eprint!("{}", rep.table());
        Ok(rep.pass)
    };
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
