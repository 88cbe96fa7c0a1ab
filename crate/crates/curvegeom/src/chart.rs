//! Arclength charts of the boundary piece around the origin.

use std::io::Write;

use crate::domain::{cross, CurveJet, PlanarDomain, Point};
use crate::GeomError;

/// Minimum number of uniform samples on `[-s0, s0]`.
pub const MIN_SAMPLES: usize = 2049;
/// Default uniform sample count of [`build_chart`].
pub const DEFAULT_SAMPLES: usize = 4097;

/// Curvatures at or below this are treated as zero (radius at infinity).
pub const FLAT_CURVATURE: f64 = 1e-12;

/// Sample of the arclength parametrization `γ(s) = (α, β)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartSample {
    pub s: f64,
    pub gamma: Point,
    pub d1: Point,
    pub d2: Point,
    /// Curvature of the exact primitive.
    pub k: f64,
    /// Exact `dK/ds` where the primitive is smooth.
    pub kp: f64,
}

/// Interpolated frame data at an arbitrary `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub gamma: Point,
    /// Tangent `γ′ = (α′, β′)`.
    pub t: Point,
    /// Inward normal `(-β′, α′)`.
    pub n: Point,
    pub d2: Point,
    pub k: f64,
    pub kp: f64,
}

impl Frame {
    /// Radius of curvature, infinite for flat points.
    pub fn radius(&self) -> f64 {
        if self.k > FLAT_CURVATURE {
            1.0 / self.k
        } else {
            f64::INFINITY
        }
    }
}

/// Dense arclength data of `γ` on `[-s0, s0]`.
///
/// Nodes are uniform plus every junction of the primitive, where two one-sided
/// samples share the same `s`. Position is the quintic Hermite interpolant of
/// `(γ, γ′, γ″)`; the tangent, `K` and `K′` are cubic Hermite interpolants of the
/// exact sample values, so no quantity differentiates positions.
#[derive(Clone, Debug)]
pub struct BoundaryChart {
    pub s0: f64,
    ds: f64,
    samples: Vec<ChartSample>,
}

/// Builds the chart of the boundary piece `|s| ≤ s0` with default resolution.
pub fn build_chart(domain: &PlanarDomain, s0: f64) -> Result<BoundaryChart, GeomError> {
    build_chart_with(domain, s0, DEFAULT_SAMPLES)
}

/// As [`build_chart`], with `n` uniform samples (rounded up to an odd count ≥ [`MIN_SAMPLES`]).
pub fn build_chart_with(domain: &PlanarDomain, s0: f64, n: usize) -> Result<BoundaryChart, GeomError> {
    let half = domain.half_length();
    if !(s0 > 0.0) || s0 >= half {
        return Err(GeomError::S0TooLarge { s0, half });
    }
    let mut n = n.max(MIN_SAMPLES);
    if n.is_multiple_of(2) {
        n += 1;
    }
    let m = n / 2;
    let ds = s0 / m as f64;
    let breaks: Vec<(f64, f64)> =
        domain.breaks().into_iter().map(|t| (domain.s_of_t(t), t)).filter(|&(s, _)| s > 0.0 && s < s0).collect();
    let mut right = Vec::with_capacity(m + 1 + 2 * breaks.len());
    for i in 0..=m {
        let s = if i == m { s0 } else { i as f64 * ds };
        if i != 0 && i != m && breaks.iter().any(|&(sb, _)| (sb - s).abs() < 0.25 * ds) {
            continue;
        }
        right.push(sample_from_jet(s, &domain.eval(domain.t_of_s(s))));
    }
    for &(sb, tb) in &breaks {
        right.push(sample_from_jet(sb, &domain.eval_half_one_sided(tb, true)));
        right.push(sample_from_jet(sb, &domain.eval_half_one_sided(tb, false)));
    }
    // Stable: the left-sided sample of a junction stays first.
    right.sort_by(|a, b| a.s.total_cmp(&b.s));
    // The origin frame is exact by construction.
    right[0].gamma = [0.0, 0.0];
    right[0].d1 = [1.0, 0.0];
    right[0].d2 = [0.0, right[0].k];
    right[0].kp = 0.0;
    let mut samples = Vec::with_capacity(2 * right.len() - 1);
    for r in right.iter().skip(1).rev() {
        samples.push(ChartSample {
            s: -r.s,
            gamma: [-r.gamma[0], r.gamma[1]],
            d1: [r.d1[0], -r.d1[1]],
            d2: [-r.d2[0], r.d2[1]],
            k: r.k,
            kp: -r.kp,
        });
    }
    samples.extend(right);
    Ok(BoundaryChart { s0, ds, samples })
}

fn sample_from_jet(s: f64, j: &CurveJet) -> ChartSample {
    let v = j.speed();
    let t = [j.d1[0] / v, j.d1[1] / v];
    let tang = j.d2[0] * t[0] + j.d2[1] * t[1];
    let d2 = [(j.d2[0] - tang * t[0]) / (v * v), (j.d2[1] - tang * t[1]) / (v * v)];
    ChartSample { s, gamma: j.p, d1: t, d2, k: j.curvature(), kp: j.curvature_prime() }
}

// Quintic Hermite basis on [0, 1]: value, slope and curvature weights at both ends.
fn hermite5(u: f64) -> [f64; 6] {
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    let u5 = u4 * u;
    [
        1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5,
        u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5,
        0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5),
        10.0 * u3 - 15.0 * u4 + 6.0 * u5,
        -4.0 * u3 + 7.0 * u4 - 3.0 * u5,
        0.5 * (u3 - 2.0 * u4 + u5),
    ]
}

impl BoundaryChart {
    pub fn samples(&self) -> &[ChartSample] {
        &self.samples
    }

    /// Spacing of the uniform nodes (junction nodes come on top).
    pub fn ds(&self) -> f64 {
        self.ds
    }

    /// Samples with `0 ≤ s ≤ s0`.
    pub fn right_samples(&self) -> &[ChartSample] {
        &self.samples[self.samples.len() / 2..]
    }

    /// Index `i` of the cell `[s_i, s_{i+1}]` (of positive length) holding `s`.
    fn cell(&self, s: f64) -> usize {
        let n = self.samples.len();
        let guess = (((s + self.s0) / self.ds).floor().max(0.0) as usize).min(n - 2);
        // Junction nodes shift indices by a few places; walk from the guess.
        let mut i = guess.min(n - 2);
        while i > 0 && self.samples[i].s > s {
            i -= 1;
        }
        while i + 2 < n && self.samples[i + 1].s <= s {
            i += 1;
        }
        i
    }

    /// Frame at `s ∈ [-s0, s0]` (clamped).
    pub fn frame(&self, s: f64) -> Frame {
        let s = s.clamp(-self.s0, self.s0);
        let i = self.cell(s);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.s - a.s;
        let u = (s - a.s) / h;
        let row = hermite5(u);
        // Relative to `a.gamma`, which keeps evaluation noise at the size of `ε|γ|`.
        let mut gamma = a.gamma;
        for c in 0..2 {
            gamma[c] += row[3] * (b.gamma[c] - a.gamma[c])
                + row[1] * h * a.d1[c]
                + row[2] * h * h * a.d2[c]
                + row[4] * h * b.d1[c]
                + row[5] * h * h * b.d2[c];
        }
        // The tangent has its own cubic interpolant with slopes `γ″ = KN`, so the
        // normal and its derivatives never come from differentiated positions.
        let mut tv = [0.0; 2];
        let mut d2 = [0.0; 2];
        for c in 0..2 {
            let (v, d) = hermite3(u, h, a.d1[c], a.d2[c], b.d1[c], b.d2[c]);
            tv[c] = v;
            d2[c] = d;
        }
        let v = tv[0].hypot(tv[1]);
        let t = [tv[0] / v, tv[1] / v];
        let (k, kp) = hermite3(u, h, a.k, a.kp, b.k, b.kp);
        Frame { gamma, t, n: [-t[1], t[0]], d2, k, kp }
    }

    pub fn gamma(&self, s: f64) -> Point {
        self.frame(s).gamma
    }

    pub fn curvature(&self, s: f64) -> f64 {
        self.frame(s).k
    }

    /// Largest sampled curvature on `[0, s0]`.
    pub fn max_curvature(&self) -> f64 {
        self.right_samples().iter().map(|c| c.k).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `τ = max β′(s)/s` over the positive samples, floored at `1e-6`.
    pub fn tangent_slope_bound(&self) -> f64 {
        self.right_samples().iter().filter(|c| c.s > 0.0).map(|c| c.d1[1] / c.s).fold(1e-6, f64::max)
    }

    /// The three curvature formulas at sample `i`: `det(γ′,γ″)`, `β″/α′`, `−α″/β′`
    /// (the last two are `NaN` where the denominator is below `1e-6`).
    pub fn curvature_formulas(&self, i: usize) -> [f64; 3] {
        let c = &self.samples[i];
        let det = cross(c.d1, c.d2);
        let f2 = if c.d1[0].abs() > 1e-6 { c.d2[1] / c.d1[0] } else { f64::NAN };
        let f3 = if c.d1[1].abs() > 1e-6 { -c.d2[0] / c.d1[1] } else { f64::NAN };
        [det, f2, f3]
    }

    /// Writes the samples as CSV: `s, alpha, beta, alphap, betap, K, Kp`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "s,alpha,beta,alphap,betap,K,Kp")?;
        for c in &self.samples {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                c.s, c.gamma[0], c.gamma[1], c.d1[0], c.d1[1], c.k, c.kp
            )?;
        }
        Ok(())
    }
}

/// Cubic Hermite value and derivative from end values and slopes.
fn hermite3(u: f64, h: f64, y0: f64, m0: f64, y1: f64, m1: f64) -> (f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    let v = (2.0 * u3 - 3.0 * u2 + 1.0) * y0
        + (u3 - 2.0 * u2 + u) * h * m0
        + (-2.0 * u3 + 3.0 * u2) * y1
        + (u3 - u2) * h * m1;
    let d = ((6.0 * u2 - 6.0 * u) * (y0 - y1)) / h + (3.0 * u2 - 4.0 * u + 1.0) * m0 + (3.0 * u2 - 2.0 * u) * m1;
    (v, d)
}
