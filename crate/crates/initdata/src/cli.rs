//! `mkinit`: build a bump on a grid and write it as a snapshot.

use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use curvegeom::{DomainSpec, PlanarDomain};
use pdesolve::{write_snapshot, Grid, SnapshotHeader};

use crate::{make_bump, BumpSpec, InitError};

#[derive(Args, Clone, Debug)]
pub struct MkinitArgs {
    /// Preset name, JSON file or inline JSON.
    #[arg(long)]
    pub domain: String,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub rho: f64,
    /// `C₂`.
    #[arg(long)]
    pub amp: f64,
    #[arg(long, default_value_t = 0.0)]
    pub c1: f64,
    #[arg(long, default_value_t = 3.0)]
    pub p: f64,
    /// Grid spacing; defaults to `eps/8`.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn mkinit(args: &MkinitArgs) -> Result<SnapshotHeader, String> {
    let spec = DomainSpec::resolve(&args.domain).map_err(|e| e.to_string())?;
    let domain = PlanarDomain::new(spec.clone()).map_err(|e| e.to_string())?;
    let bump = BumpSpec { base: [0.0, 0.0], rho: args.rho, eps: args.eps, c1: args.c1, c2: args.amp, p: args.p };
    let h = args.h.unwrap_or(args.eps / 8.0);
    let grid = Arc::new(Grid::build(&domain, h).map_err(|e| e.to_string())?);
    let u0 = make_bump(bump, &domain, grid.clone()).map_err(|e: InitError| e.to_string())?;
    let header = SnapshotHeader {
        grid: grid.spec,
        t: 0.0,
        p: Some(args.p),
        provenance: serde_json::json!({ "domain": spec, "bump": bump }),
    };
    if let Some(dir) = args.out.parent() {
        std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    }
    let file = std::fs::File::create(&args.out).map_err(|e| format!("{}: {e}", args.out.display()))?;
    write_snapshot(std::io::BufWriter::new(file), &header, &u0).map_err(|e| e.to_string())?;
    Ok(header)
}
