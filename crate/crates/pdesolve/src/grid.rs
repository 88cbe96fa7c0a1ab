//! Masked Cartesian grids with cut-cell arm data.

use std::sync::Arc;

use curvegeom::{PlanarDomain, Point};
use serde::{Deserialize, Serialize};

use crate::SolveError;

/// Arm directions, in storage order.
pub const E: usize = 0;
pub const W: usize = 1;
pub const N: usize = 2;
pub const S: usize = 3;

const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Arms shorter than this fraction of `h` make a node an interpolated one.
pub const DEFAULT_THETA_MIN: f64 = 0.5;

/// What the grid needs to know about a domain.
pub trait Geometry: Sync {
    /// `[xmin, ymin, xmax, ymax]`.
    fn bbox(&self) -> [f64; 4];
    /// Sorted boundary crossings of the line at height `y`.
    fn row_crossings(&self, y: f64) -> Vec<f64>;
    /// Sorted boundary crossings of the vertical line through `x`.
    fn col_crossings(&self, x: f64) -> Vec<f64>;
    /// Vertical symmetry axis `x = c`, if the domain has one.
    fn mirror_axis(&self) -> Option<f64>;
}

impl Geometry for PlanarDomain {
    fn bbox(&self) -> [f64; 4] {
        PlanarDomain::bbox(self)
    }
    fn row_crossings(&self, y: f64) -> Vec<f64> {
        self.horizontal_crossings(y)
    }
    fn col_crossings(&self, x: f64) -> Vec<f64> {
        self.vertical_crossings(x)
    }
    fn mirror_axis(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn unit() -> Self {
        Rect { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 }
    }
}

impl Geometry for Rect {
    fn bbox(&self) -> [f64; 4] {
        [self.x0, self.y0, self.x1, self.y1]
    }
    fn row_crossings(&self, y: f64) -> Vec<f64> {
        if y > self.y0 && y < self.y1 {
            vec![self.x0, self.x1]
        } else {
            Vec::new()
        }
    }
    fn col_crossings(&self, x: f64) -> Vec<f64> {
        if x > self.x0 && x < self.x1 {
            vec![self.y0, self.y1]
        } else {
            Vec::new()
        }
    }
    fn mirror_axis(&self) -> Option<f64> {
        Some(0.5 * (self.x0 + self.x1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Exterior,
    /// All four neighbours inside.
    Interior,
    /// At least one arm cut by the boundary.
    NearBoundary,
    /// Some arm shorter than `theta_min·h`: the value is interpolated along
    /// that axis instead of evolved.
    Interpolated,
}

impl NodeKind {
    pub fn is_inside(self) -> bool {
        self != NodeKind::Exterior
    }
    pub fn is_evolved(self) -> bool {
        matches!(self, NodeKind::Interior | NodeKind::NearBoundary)
    }
}

/// Interpolation rule of an [`NodeKind::Interpolated`] node: linear along the
/// axis of its shortest arm `dir`, between the boundary at distance `a` and
/// the support on the other side at distance `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link {
    pub node: usize,
    pub dir: usize,
    /// Opposite neighbour, `None` when that arm is cut too.
    pub partner: Option<usize>,
    pub a: f64,
    pub b: f64,
}

impl Link {
    /// `(a·v + b·g)/(a+b)` with `v` the partner value (or the opposite
    /// boundary value) and `g` the boundary value on the short side.
    #[inline]
    pub fn value(&self, v: f64, g: f64) -> f64 {
        (self.a * v + self.b * g) / (self.a + self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub h: f64,
    pub x0: f64,
    pub y0: f64,
    pub nx: usize,
    pub ny: usize,
    pub theta_min: f64,
}

/// Node layout and stencil geometry; shared by every field on it.
#[derive(Clone, Debug)]
pub struct Grid {
    pub spec: GridSpec,
    kinds: Vec<NodeKind>,
    /// Arm lengths as fractions of `h`.
    arms: Vec<[f64; 4]>,
    /// Bit `d` set when arm `d` ends on the boundary.
    cut: Vec<u8>,
    links: Vec<Link>,
    evolved: Vec<usize>,
    center_col: Option<usize>,
    coef_max: f64,
    /// Per row: maximal runs `[a, b)` of interior nodes, then the cut and
    /// interpolated nodes.
    rows: Vec<RowPlan>,
}

#[derive(Clone, Debug, Default)]
pub struct RowPlan {
    pub runs: Vec<(usize, usize)>,
    pub cut: Vec<usize>,
    pub interpolated: Vec<usize>,
}

impl Grid {
    /// Grid of spacing `h` covering `geom`, symmetric about its mirror axis.
    pub fn build(geom: &dyn Geometry, h: f64) -> Result<Self, SolveError> {
        Self::build_with(geom, h, DEFAULT_THETA_MIN)
    }

    pub fn build_with(geom: &dyn Geometry, h: f64, theta_min: f64) -> Result<Self, SolveError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(SolveError::InvalidGrid(format!("spacing h = {h}")));
        }
        if !(0.0..1.0).contains(&theta_min) {
            return Err(SolveError::InvalidGrid(format!("theta_min = {theta_min} must lie in [0, 1)")));
        }
        let [xmin, ymin, xmax, ymax] = geom.bbox();
        let xc = geom.mirror_axis().unwrap_or(0.5 * (xmin + xmax));
        let half = ((xmax - xc).max(xc - xmin) / h).ceil() as usize + 1;
        let nx = 2 * half + 1;
        let ny = ((ymax - ymin) / h).ceil() as usize + 2;
        if nx.saturating_mul(ny) > 50_000_000 {
            return Err(SolveError::InvalidGrid(format!("{nx} x {ny} nodes is too many")));
        }
        let spec = GridSpec { h, x0: xc - half as f64 * h, y0: ymin, nx, ny, theta_min };
        Self::from_spec(geom, spec)
    }

    /// Rebuild the masks of a stored grid.
    pub fn from_spec(geom: &dyn Geometry, spec: GridSpec) -> Result<Self, SolveError> {
        let GridSpec { h, x0, y0, nx, ny, theta_min } = spec;
        let mirrored = geom.mirror_axis().is_some();
        let center = (nx - 1) / 2;
        if mirrored {
            let xc = geom.mirror_axis().unwrap();
            if nx % 2 == 0 || (x0 + center as f64 * h - xc).abs() > 1e-9 * h.max(xc.abs()) {
                return Err(SolveError::InvalidGrid("grid is not centred on the mirror axis".into()));
            }
        }
        let n = nx * ny;
        let tol = 1e-10 * h;
        let ymin = geom.bbox()[1];
        let xs = |i: usize| x0 + i as f64 * h;
        let ys = |j: usize| y0 + j as f64 * h;
        // Only the right half (with the axis column) is classified; the left
        // half is its mirror image.
        let first = if mirrored { center } else { 0 };
        let mut inside = vec![false; n];
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(ny);
        for j in 0..ny {
            let y = ys(j);
            let cr = if y <= ymin + tol { Vec::new() } else { geom.row_crossings(y) };
            for i in first..nx {
                let x = xs(i);
                let below = cr.partition_point(|&c| c < x - tol);
                let near = cr.iter().any(|&c| (c - x).abs() <= tol);
                inside[j * nx + i] = below % 2 == 1 && !near;
            }
            rows.push(cr);
        }
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); nx];
        for (i, col) in cols.iter_mut().enumerate().skip(first) {
            *col = geom.col_crossings(xs(i));
        }
        let first_after = |cr: &[f64], v: f64, sign: f64| -> f64 {
            let best = cr
                .iter()
                .map(|&c| sign * (c - v))
                .filter(|&d| d > 0.0 && d <= h * (1.0 + 1e-9))
                .fold(f64::INFINITY, f64::min);
            if best.is_finite() {
                (best / h).clamp(1e-12, 1.0)
            } else {
                1.0
            }
        };
        let mut arms = vec![[1.0; 4]; n];
        let mut cut = vec![0u8; n];
        for j in 0..ny {
            for i in first..nx {
                let k = j * nx + i;
                if !inside[k] {
                    continue;
                }
                for (d, &(di, dj)) in DIRS.iter().enumerate() {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    let nb_in = ni >= 0 && nj >= 0 && (ni as usize) < nx && (nj as usize) < ny && {
                        let ni = ni as usize;
                        let m = if mirrored && ni < center { 2 * center - ni } else { ni };
                        inside[nj as usize * nx + m]
                    };
                    if nb_in {
                        continue;
                    }
                    cut[k] |= 1 << d;
                    arms[k][d] = match d {
                        E => first_after(&rows[j], xs(i), 1.0),
                        W => first_after(&rows[j], xs(i), -1.0),
                        N => first_after(&cols[i], ys(j), 1.0),
                        _ => first_after(&cols[i], ys(j), -1.0),
                    };
                }
                if mirrored && i == center {
                    // The axis column sees the same boundary on both sides.
                    arms[k][W] = arms[k][E];
                    cut[k] = (cut[k] & !(1 << W)) | ((cut[k] & 1) << W);
                }
            }
        }
        if mirrored {
            for j in 0..ny {
                for i in 0..center {
                    let k = j * nx + i;
                    let m = j * nx + 2 * center - i;
                    inside[k] = inside[m];
                    let a = arms[m];
                    arms[k] = [a[W], a[E], a[N], a[S]];
                    let c = cut[m];
                    cut[k] = (c & 0b1100) | ((c & 1) << 1) | ((c >> 1) & 1);
                }
            }
        }
        let mut kinds = vec![NodeKind::Exterior; n];
        let mut links = Vec::new();
        for k in 0..n {
            if !inside[k] {
                continue;
            }
            if cut[k] == 0 {
                kinds[k] = NodeKind::Interior;
                continue;
            }
            // Shortest cut arm; ties prefer the vertical axis, then E over W
            // (equal on the axis column anyway).
            let order = [N, S, E, W];
            let (dir, th) = order
                .iter()
                .filter(|&&d| cut[k] & (1 << d) != 0)
                .map(|&d| (d, arms[k][d]))
                .fold((usize::MAX, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            if th < theta_min {
                let opp = dir ^ 1;
                let partner = (cut[k] & (1 << opp) == 0).then(|| neighbor(k, opp, nx));
                kinds[k] = NodeKind::Interpolated;
                links.push(Link { node: k, dir, partner, a: th * h, b: arms[k][opp] * h });
            } else {
                kinds[k] = NodeKind::NearBoundary;
            }
        }
        let evolved: Vec<usize> = (0..n).filter(|&k| kinds[k].is_evolved()).collect();
        if evolved.is_empty() {
            return Err(SolveError::InvalidGrid("no interior node".into()));
        }
        let coef_max = evolved
            .iter()
            .map(|&k| {
                let a = arms[k];
                2.0 / (a[E] * a[W] * h * h) + 2.0 / (a[N] * a[S] * h * h)
            })
            .fold(0.0, f64::max);
        let rows = (0..ny)
            .map(|j| {
                let mut plan = RowPlan::default();
                let mut i = 0;
                while i < nx {
                    let k = j * nx + i;
                    match kinds[k] {
                        NodeKind::Interior => {
                            let a = k;
                            while i < nx && kinds[j * nx + i] == NodeKind::Interior {
                                i += 1;
                            }
                            plan.runs.push((a, j * nx + i));
                            continue;
                        }
                        NodeKind::NearBoundary => plan.cut.push(k),
                        NodeKind::Interpolated => plan.interpolated.push(k),
                        _ => {}
                    }
                    i += 1;
                }
                plan
            })
            .collect();
        Ok(Grid { spec, kinds, arms, cut, links, evolved, center_col: mirrored.then_some(center), coef_max, rows })
    }

    pub fn h(&self) -> f64 {
        self.spec.h
    }
    pub fn nx(&self) -> usize {
        self.spec.nx
    }
    pub fn ny(&self) -> usize {
        self.spec.ny
    }
    pub fn len(&self) -> usize {
        self.spec.nx * self.spec.ny
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// `[xmin, ymin, xmax, ymax]` of the node lattice.
    pub fn bbox(&self) -> [f64; 4] {
        let s = &self.spec;
        [s.x0, s.y0, s.x0 + (s.nx - 1) as f64 * s.h, s.y0 + (s.ny - 1) as f64 * s.h]
    }
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.spec.nx + i
    }
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.spec.nx, k / self.spec.nx)
    }
    /// Node coordinates; measured from the axis column so that mirror nodes
    /// get exactly opposite offsets.
    pub fn point(&self, k: usize) -> Point {
        let (i, j) = self.ij(k);
        let h = self.spec.h;
        let y = self.spec.y0 + j as f64 * h;
        match self.center_col {
            Some(c) => {
                let xc = self.spec.x0 + c as f64 * h;
                let off = (i as f64 - c as f64) * h;
                [if xc == 0.0 { off } else { xc + off }, y]
            }
            None => [self.spec.x0 + i as f64 * h, y],
        }
    }
    pub fn kind(&self, k: usize) -> NodeKind {
        self.kinds[k]
    }
    pub fn arms(&self, k: usize) -> [f64; 4] {
        self.arms[k]
    }
    pub fn is_cut(&self, k: usize, d: usize) -> bool {
        self.cut[k] & (1 << d) != 0
    }
    pub fn neighbor(&self, k: usize, d: usize) -> usize {
        neighbor(k, d, self.spec.nx)
    }
    /// Where arm `d` of node `k` meets the boundary (or the neighbour node).
    pub fn arm_end(&self, k: usize, d: usize) -> Point {
        let p = self.point(k);
        let l = self.arms[k][d] * self.spec.h;
        let (di, dj) = DIRS[d];
        [p[0] + di as f64 * l, p[1] + dj as f64 * l]
    }
    pub fn links(&self) -> &[Link] {
        &self.links
    }
    /// Evolved nodes in row-major order.
    pub fn evolved(&self) -> &[usize] {
        &self.evolved
    }
    /// Nodes inside the domain, evolved or interpolated.
    pub fn inside_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&k| self.kinds[k].is_inside())
    }
    /// Column of the mirror axis.
    pub fn center_col(&self) -> Option<usize> {
        self.center_col
    }
    /// Mirror image of node `k`, when the grid is symmetric.
    pub fn mirror(&self, k: usize) -> Option<usize> {
        let c = self.center_col?;
        let (i, j) = self.ij(k);
        Some(self.index(2 * c - i, j))
    }
    /// Interior runs and cut nodes of row `j`.
    pub fn row_plan(&self, j: usize) -> &RowPlan {
        &self.rows[j]
    }
    /// Largest diagonal `Σ` of the Laplacian stencil.
    pub fn coef_max(&self) -> f64 {
        self.coef_max
    }
    pub fn count(&self, kind: NodeKind) -> usize {
        self.kinds.iter().filter(|&&k| k == kind).count()
    }
    /// Cell `(i, j)` and offsets in `[0,1)²` of a point in the lattice box.
    pub fn locate(&self, p: Point) -> Option<(usize, usize, f64, f64)> {
        let s = &self.spec;
        let fx = (p[0] - s.x0) / s.h;
        let fy = (p[1] - s.y0) / s.h;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let i = (fx.floor() as usize).min(s.nx - 2);
        let j = (fy.floor() as usize).min(s.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        (tx <= 1.0 && ty <= 1.0).then_some((i, j, tx, ty))
    }
}

/// Point values and gradients, from a grid or in closed form.
pub trait ScalarField: Sync {
    fn value(&self, p: Point) -> Option<f64>;
    fn gradient(&self, p: Point) -> Option<[f64; 2]>;
}

impl ScalarField for GridField {
    fn value(&self, p: Point) -> Option<f64> {
        self.sample(p)
    }
    fn gradient(&self, p: Point) -> Option<[f64; 2]> {
        self.sample_gradient(p)
    }
}

#[inline]
fn neighbor(k: usize, d: usize, nx: usize) -> usize {
    match d {
        E => k + 1,
        W => k - 1,
        N => k + nx,
        _ => k - nx,
    }
}

/// Node values on a [`Grid`]; exterior nodes hold 0.
#[derive(Clone, Debug)]
pub struct GridField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        GridField { grid, values: vec![0.0; n] }
    }

    /// Nodal values of `f` at inside nodes, interpolated nodes then fixed by
    /// their links with zero boundary data.
    pub fn from_fn<F: Fn(Point) -> f64 + Sync>(grid: Arc<Grid>, f: F) -> Self {
        use rayon::prelude::*;
        let nx = grid.nx();
        let mut values = vec![0.0; grid.len()];
        values.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                let k = j * nx + i;
                if grid.kind(k).is_evolved() {
                    *v = f(grid.point(k));
                }
            }
        });
        let mut out = GridField { grid, values };
        out.apply_links(None);
        out
    }

    pub fn from_values(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self, SolveError> {
        if values.len() != grid.len() {
            return Err(SolveError::InvalidGrid(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        Ok(GridField { grid, values })
    }

    /// Recompute interpolated nodes from their partners; `bvals` holds the
    /// boundary value at each arm end (zero when `None`).
    pub fn apply_links(&mut self, bvals: Option<&[[f64; 4]]>) {
        let grid = self.grid.clone();
        for l in grid.links() {
            let g = bvals.map_or(0.0, |b| b[l.node][l.dir]);
            let v = match l.partner {
                Some(m) => self.values[m],
                None => bvals.map_or(0.0, |b| b[l.node][l.dir ^ 1]),
            };
            self.values[l.node] = l.value(v, g);
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
    pub fn min_inside(&self) -> f64 {
        self.grid.inside_nodes().map(|k| self.values[k]).fold(f64::INFINITY, f64::min)
    }

    /// `max |u(x,y) − u(mirror)|` over node pairs; 0 for grids without a mirror.
    pub fn mirror_defect(&self) -> f64 {
        let g = &self.grid;
        let Some(c) = g.center_col() else { return 0.0 };
        let mut worst = 0.0f64;
        for j in 0..g.ny() {
            for i in 0..c {
                let a = self.values[g.index(i, j)];
                let b = self.values[g.index(2 * c - i, j)];
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }

    /// Bilinear interpolation with exterior corners replaced by linear
    /// extrapolation from the adjacent inside node across the cut; `None`
    /// outside the lattice or when a corner has no inside neighbour.
    pub fn sample(&self, p: Point) -> Option<f64> {
        let g = &self.grid;
        let (i, j, tx, ty) = g.locate(p)?;
        let c = [g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1)];
        let mut v = [0.0; 4];
        for (slot, &k) in v.iter_mut().zip(&c) {
            *slot = if g.kind(k).is_inside() { self.values[k] } else { self.ghost(k)? };
        }
        Some((1.0 - ty) * ((1.0 - tx) * v[0] + tx * v[1]) + ty * ((1.0 - tx) * v[2] + tx * v[3]))
    }

    /// Stencil gradient at an inside node (zero boundary data).
    pub fn nodal_gradient(&self, k: usize) -> Option<[f64; 2]> {
        self.grid.kind(k).is_inside().then(|| crate::ops::Stencil::gather(&self.grid, &self.values, k, None).gradient())
    }

    /// Bilinear interpolation of nodal gradients; an exterior corner takes
    /// the gradient of its inside neighbour with the longest arm toward it.
    pub fn sample_gradient(&self, p: Point) -> Option<[f64; 2]> {
        let g = &self.grid;
        let (i, j, tx, ty) = g.locate(p)?;
        let c = [g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1)];
        let mut v = [[0.0; 2]; 4];
        for (slot, &k) in v.iter_mut().zip(&c) {
            let src = if g.kind(k).is_inside() { k } else { self.ghost_source(k)? };
            *slot = self.nodal_gradient(src)?;
        }
        let w = [(1.0 - tx) * (1.0 - ty), tx * (1.0 - ty), (1.0 - tx) * ty, tx * ty];
        let mut out = [0.0; 2];
        for (wk, vk) in w.iter().zip(&v) {
            out[0] += wk * vk[0];
            out[1] += wk * vk[1];
        }
        Some(out)
    }

    fn ghost_source(&self, k: usize) -> Option<usize> {
        let g = &self.grid;
        let (i, j) = g.ij(k);
        let mut best: Option<(f64, usize)> = None;
        for (d, &(di, dj)) in DIRS.iter().enumerate() {
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if ni < 0 || nj < 0 || ni as usize >= g.nx() || nj as usize >= g.ny() {
                continue;
            }
            let m = g.index(ni as usize, nj as usize);
            if g.kind(m).is_inside() {
                let th = g.arms(m)[d ^ 1];
                if best.is_none_or(|(t, _)| th > t) {
                    best = Some((th, m));
                }
            }
        }
        best.map(|(_, m)| m)
    }

    /// Linear extrapolation to exterior node `k` through the inside neighbour
    /// with the longest cut arm pointing at `k`.
    fn ghost(&self, k: usize) -> Option<f64> {
        let g = &self.grid;
        let (i, j) = g.ij(k);
        let mut best: Option<(f64, f64)> = None;
        for (d, &(di, dj)) in DIRS.iter().enumerate() {
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if ni < 0 || nj < 0 || ni as usize >= g.nx() || nj as usize >= g.ny() {
                continue;
            }
            let m = g.index(ni as usize, nj as usize);
            if !g.kind(m).is_inside() {
                continue;
            }
            // Arm of m pointing back at k.
            let th = g.arms(m)[d ^ 1];
            if best.is_none_or(|(t, _)| th > t) {
                best = Some((th, self.values[m] * (1.0 - 1.0 / th)));
            }
        }
        best.map(|(_, v)| v)
    }
}
