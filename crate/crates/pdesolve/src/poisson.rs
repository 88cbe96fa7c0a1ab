//! `−Δψ = 1` with Dirichlet data, and the comparison `u ≤ c₂ψ`.

use std::sync::Arc;

use curvegeom::Point;
use rayon::prelude::*;
use serde::Serialize;

use crate::grid::{Grid, GridField, NodeKind};
use crate::ops::Stencil;
use crate::SolveError;

pub const POISSON_TOL: f64 = 1e-10;
pub const MAX_SWEEPS: usize = 200_000;

/// C^∞ step: 1 for `t ≤ 0`, 0 for `t ≥ 1`, decreasing in between.
pub fn glue(t: f64) -> f64 {
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = f(1.0 - t);
        a / (a + f(t))
    }
}

/// Boundary cutoff `h_{x₀}`: 1 within `ρ/2` of `x0`, 0 beyond `3ρ/4`.
pub fn cutoff_data(x0: Point, rho: f64) -> impl Fn(Point) -> f64 + Sync {
    move |p: Point| {
        let d = (p[0] - x0[0]).hypot(p[1] - x0[1]);
        glue((d - 0.5 * rho) / (0.25 * rho))
    }
}

#[derive(Clone, Debug)]
pub struct PoissonSolution {
    pub psi: GridField,
    /// Boundary value at every cut arm end.
    pub bvals: Vec<[f64; 4]>,
    pub residual: f64,
    pub rhs_norm: f64,
    pub sweeps: usize,
}

impl PoissonSolution {
    /// Largest upwind gradient norm of `ψ`, boundary data included. This is
    /// the same slope the time stepper uses, so `c₂ψ` with
    /// `c₂ = G^{−p/(p−1)}` is an exact discrete supersolution.
    pub fn grad_max(&self) -> f64 {
        let g = &self.psi.grid;
        g.evolved()
            .iter()
            .map(|&k| Stencil::gather(g, &self.psi.values, k, Some(&self.bvals)).upwind_norm())
            .fold(0.0, f64::max)
    }

    /// `‖∇ψ‖∞^{−p/(p−1)}`.
    pub fn default_c2(&self, p: f64) -> f64 {
        self.grad_max().powf(-p / (p - 1.0))
    }
}

struct Row {
    k: usize,
    diag: f64,
    b: f64,
    idx: [usize; 4],
    coef: [f64; 4],
}

/// Red–black SOR on the cut-cell operator until the residual drops below
/// `1e−10·‖rhs‖₂`.
pub fn solve_poisson<G: Fn(Point) -> f64 + Sync>(grid: Arc<Grid>, data: G) -> Result<PoissonSolution, SolveError> {
    let n = grid.len();
    let mut bvals = vec![[0.0; 4]; n];
    for k in grid.inside_nodes() {
        for (d, slot) in bvals[k].iter_mut().enumerate() {
            if grid.is_cut(k, d) {
                *slot = data(grid.arm_end(k, d));
            }
        }
    }
    let mut link_of = vec![usize::MAX; n];
    for (i, l) in grid.links().iter().enumerate() {
        link_of[l.node] = i;
    }
    let h = grid.h();
    let rows: Vec<Row> = grid
        .evolved()
        .iter()
        .map(|&k| {
            let a = grid.arms(k);
            let l = a.map(|t| t * h);
            let mut row = Row { k, diag: 0.0, b: 1.0, idx: [k; 4], coef: [0.0; 4] };
            for d in 0..4 {
                let c = 2.0 / ((l[d] + l[d ^ 1]) * l[d]);
                row.diag += c;
                if grid.is_cut(k, d) {
                    row.b += c * bvals[k][d];
                    continue;
                }
                let m = grid.neighbor(k, d);
                if grid.kind(m) == NodeKind::Interpolated {
                    let link = grid.links()[link_of[m]];
                    if link.partner == Some(k) {
                        // ψ_m = (a ψ_k + b g)/(a + b)
                        let s = link.a + link.b;
                        row.diag -= c * link.a / s;
                        row.b += c * link.b * bvals[m][link.dir] / s;
                        continue;
                    }
                }
                row.idx[d] = m;
                row.coef[d] = c;
            }
            row
        })
        .collect();
    let rhs_norm = rows.iter().map(|r| r.b * r.b).sum::<f64>().sqrt();
    let (red, black): (Vec<&Row>, Vec<&Row>) = rows.iter().partition(|r| {
        let (i, j) = grid.ij(r.k);
        (i + j) % 2 == 0
    });
    let [x0, y0, x1, y1] = grid.bbox();
    let pi = std::f64::consts::PI;
    let rho = 0.5 * ((pi * h / (x1 - x0)).cos() + (pi * h / (y1 - y0)).cos());
    let omega = 2.0 / (1.0 + (1.0 - rho * rho).sqrt());

    let mut field = GridField::zeros(grid.clone());
    field.apply_links(Some(&bvals));
    let residual = |u: &[f64]| -> f64 {
        rows.par_iter()
            .map(|r| {
                let mut v = r.b - r.diag * u[r.k];
                for d in 0..4 {
                    v += r.coef[d] * u[r.idx[d]];
                }
                v * v
            })
            .sum::<f64>()
            .sqrt()
    };
    let mut sweeps = 0;
    let mut res = residual(&field.values);
    while res > POISSON_TOL * rhs_norm {
        if sweeps >= MAX_SWEEPS {
            return Err(SolveError::PoissonNotConverged { residual: res, rhs_norm, sweeps });
        }
        for color in [&red, &black] {
            let u = &field.values;
            let upd: Vec<f64> = color
                .par_iter()
                .map(|r| {
                    let mut num = r.b;
                    for d in 0..4 {
                        num += r.coef[d] * u[r.idx[d]];
                    }
                    let old = u[r.k];
                    old + omega * (num / r.diag - old)
                })
                .collect();
            for (r, v) in color.iter().zip(upd) {
                field.values[r.k] = v;
            }
            field.apply_links(Some(&bvals));
        }
        sweeps += 1;
        if sweeps % 20 == 0 {
            res = residual(&field.values);
        }
    }
    Ok(PoissonSolution { psi: field, bvals, residual: res, rhs_norm, sweeps })
}

/// `min (c₂ψ − u)` over the inside nodes.
pub fn comparison_margin(u: &GridField, psi: &GridField, c2: f64) -> f64 {
    u.grid.inside_nodes().map(|k| c2 * psi.values[k] - u.values[k]).fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarginSample {
    pub t: f64,
    pub margin: f64,
}

/// Margins of a sampled time series `(t, u)`.
pub fn comparison_check<'a, I>(series: I, psi: &GridField, c2: f64) -> Vec<MarginSample>
where
    I: IntoIterator<Item = (f64, &'a GridField)>,
{
    series.into_iter().map(|(t, u)| MarginSample { t, margin: comparison_margin(u, psi, c2) }).collect()
}
