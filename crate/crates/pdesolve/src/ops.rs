//! Stencils on a [`Grid`]. Every expression is written so that swapping the
//! E and W data of a node gives a bitwise mirrored result.

use crate::grid::{Grid, E, N, S, W};

/// Neighbour values and arm lengths of one node.
#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    pub c: f64,
    pub v: [f64; 4],
    pub l: [f64; 4],
}

impl Stencil {
    /// `bvals` gives boundary values at arm ends (zero when `None`).
    #[inline]
    pub fn gather(grid: &Grid, u: &[f64], k: usize, bvals: Option<&[[f64; 4]]>) -> Self {
        let h = grid.h();
        let a = grid.arms(k);
        let mut v = [0.0; 4];
        for (d, slot) in v.iter_mut().enumerate() {
            *slot = if grid.is_cut(k, d) { bvals.map_or(0.0, |b| b[k][d]) } else { u[grid.neighbor(k, d)] };
        }
        Stencil { c: u[k], v, l: [a[E] * h, a[W] * h, a[N] * h, a[S] * h] }
    }

    /// Shortley–Weller Laplacian.
    #[inline]
    pub fn laplacian(&self) -> f64 {
        let [le, lw, ln, ls] = self.l;
        let [ve, vw, vn, vs] = self.v;
        let c = self.c;
        let lx = 2.0 / (le + lw) * ((ve - c) / le + (vw - c) / lw);
        let ly = 2.0 / (ln + ls) * ((vn - c) / ln + (vs - c) / ls);
        lx + ly
    }

    /// Upwind gradient norm: per axis the largest ascending one-sided slope
    /// (or 0). Nondecreasing in the neighbours and nonincreasing in the
    /// centre, which keeps the explicit update monotone.
    #[inline]
    pub fn upwind_norm(&self) -> f64 {
        let [le, lw, ln, ls] = self.l;
        let [ve, vw, vn, vs] = self.v;
        let c = self.c;
        let gx = ((ve - c) / le).max((vw - c) / lw).max(0.0);
        let gy = ((vn - c) / ln).max((vs - c) / ls).max(0.0);
        gx.hypot(gy)
    }

    /// Three-point gradient on the (possibly uneven) arms: central for
    /// regular nodes, one-sided second order toward a cut.
    #[inline]
    pub fn gradient(&self) -> [f64; 2] {
        [d3(self.c, self.v[E], self.l[E], self.v[W], self.l[W]), d3(self.c, self.v[N], self.l[N], self.v[S], self.l[S])]
    }
}

/// Derivative at 0 of the parabola through `(−b, vm)`, `(0, c)`, `(a, vp)`.
#[inline]
fn d3(c: f64, vp: f64, a: f64, vm: f64, b: f64) -> f64 {
    (b * b * (vp - c) - a * a * (vm - c)) / (a * b * (a + b))
}

/// `|g|^p` with `0^p = 0`.
#[inline]
pub fn pow_p(g: f64, p: f64) -> f64 {
    if g == 0.0 {
        0.0
    } else {
        g.powf(p)
    }
}

/// `(g²)^{p/2}` from the squared norm.
#[inline]
pub fn pow_half(g2: f64, p: f64) -> f64 {
    if g2 == 0.0 {
        0.0
    } else if p == 3.0 {
        g2 * g2.sqrt()
    } else if p == 4.0 {
        g2 * g2
    } else {
        g2.powf(0.5 * p)
    }
}

/// Regular five-point node: neighbour values `E, W, N, S` and centre.
#[derive(Clone, Copy, Debug)]
pub struct Regular {
    pub c: f64,
    pub v: [f64; 4],
}

impl Regular {
    #[inline]
    pub fn gather(u: &[f64], k: usize, nx: usize) -> Self {
        Regular { c: u[k], v: [u[k + 1], u[k - 1], u[k + nx], u[k - nx]] }
    }
    /// `h²Δ_h u`.
    #[inline]
    pub fn laplacian_h2(&self) -> f64 {
        let [ve, vw, vn, vs] = self.v;
        (ve + vw) + (vn + vs) - 4.0 * self.c
    }
    /// `h²` times the squared upwind norm.
    #[inline]
    pub fn upwind_sq_h2(&self) -> f64 {
        let [ve, vw, vn, vs] = self.v;
        let c = self.c;
        let gx = (ve - c).max(vw - c).max(0.0);
        let gy = (vn - c).max(vs - c).max(0.0);
        gx * gx + gy * gy
    }
    /// `4h²` times the squared central gradient.
    #[inline]
    pub fn grad_sq_4h2(&self) -> f64 {
        let [ve, vw, vn, vs] = self.v;
        let gx = ve - vw;
        let gy = vn - vs;
        gx * gx + gy * gy
    }
}
