//! The scalar function `delta`, Blaschke factors, the trace formula and the
//! phase `phi_0` at `z = 1`.
//!
//! Everything is driven by the log-weight `g(zeta) = log(1 - |r(zeta)|^2)`:
//!
//! ```text
//! C(z)     = int g(zeta) / (zeta - z) d zeta
//! delta(z) = exp((i / 2 pi) C(z))
//! a(z)     = h(z) delta(z),  h(z) = prod (z - eta_n) / (z - conj eta_n)
//! phi_0    = arg conj r(1) - (1/pi) PV int g(zeta) / (zeta - 1) d zeta
//! ```
//!
//! `g` is carried as a piecewise-linear interpolant with a knot `g(0) = 0`.
//! In the generic case `|r(+-1)| = 1` and `g` has logarithmic singularities;
//! the cells straddling `+-1` then use the model `2 log|zeta -+ 1| + C`
//! matched to the neighbouring knot. Beyond the table support the decay
//! `g ~ zeta^-4` is integrated in closed form and reported as a tail bound.

use crate::error::{Error, Result};
use crate::linalg::{C64, I, ONE};
use crate::quad::{gauss_legendre, gauss_panel};
use crate::scattering::{DiscreteSpectrum, ReflectionAtOne, Scatterer};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `nu = -log(1 - |r|^2) / (2 pi)`.
pub fn nu_of(r: C64) -> Result<f64> {
    let m = r.norm_sqr();
    if !(m < 1.0) {
        return Err(Error::invalid(format!("|r| = {} is not below 1", m.sqrt())));
    }
    Ok(-(-m).ln_1p() / (2.0 * PI))
}

/// How the samples of a [`ReflectionTable`] cover the real line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableLayout {
    /// Samples anywhere on the line, interpolated as given.
    General,
    /// Samples on `(1, Z]` only, extended by `g(-zeta) = g(1/zeta) = g(zeta)`
    /// (the reflection symmetries). The Cauchy integral then inherits
    /// `C(1/z) = -C(z)` exactly.
    Reciprocal,
}

/// Reflection samples on the real line with their log-weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionTable {
    zeta: Vec<f64>,
    r: Vec<C64>,
    g: Vec<f64>,
    /// `|r(+-1)| = 1`: logarithmic cells next to `+-1`.
    pub generic: bool,
    pub layout: TableLayout,
}

/// Sampling plan for [`ReflectionTable::from_scatterer`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableConfig {
    /// Closest approach to `+-1`.
    pub gap: f64,
    /// Geometric ratio of the mesh leaving `+-1`.
    pub grading: f64,
    /// Outer support `Z`.
    pub zmax: f64,
    /// Log-spaced points on `[1 + graded_width, Z]`.
    pub outer: usize,
    pub graded_width: f64,
    /// Largest spacing inside the graded zone.
    pub max_step: f64,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            gap: 1e-6,
            grading: std::f64::consts::SQRT_2,
            zmax: 40.0,
            outer: 240,
            graded_width: 0.5,
            max_step: 5e-3,
        }
    }
}

impl TableConfig {
    /// The same plan with every spacing halved.
    pub fn refined(&self) -> Self {
        TableConfig {
            grading: self.grading.sqrt(),
            outer: 2 * self.outer,
            max_step: 0.5 * self.max_step,
            ..*self
        }
    }

    /// Points in `(1, Z]`.
    pub fn base_points(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        let mut u = self.gap;
        while u < self.graded_width {
            pts.push(1.0 + u);
            u = (u * self.grading).min(u + self.max_step);
        }
        let lo = (1.0 + self.graded_width).ln();
        let hi = self.zmax.ln();
        for j in 0..=self.outer {
            pts.push((lo + (hi - lo) * j as f64 / self.outer as f64).exp());
        }
        pts
    }

    /// Base points with their reciprocals and negatives, sorted.
    pub fn grid(&self) -> Vec<f64> {
        let mut g: Vec<f64> = self
            .base_points()
            .iter()
            .flat_map(|&z| [z, 1.0 / z, -z, -1.0 / z])
            .collect();
        g.sort_by(|a, b| a.total_cmp(b));
        g.dedup();
        g
    }
}

/// One piece of the interpolant of `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Piece {
    Linear { a: f64, b: f64, ga: f64, gb: f64 },
    /// `2 log|zeta - c| + cst` on `[a, b]`, with `c` one of the endpoints.
    Log { c: f64, a: f64, b: f64, cst: f64 },
    /// `g0 (z0 / zeta)^4` on `[z0, inf)`, `z0 > 0`.
    TailRight { z0: f64, g0: f64 },
    /// `g0 (z0 / zeta)^4` on `(-inf, z0]`, `z0 < 0`.
    TailLeft { z0: f64, g0: f64 },
}

impl Piece {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            Piece::Linear { a, b, ga, gb } => {
                let t = (x - a) / (b - a);
                ga * (1.0 - t) + gb * t
            }
            Piece::Log { c, cst, .. } => 2.0 * (x - c).abs().ln() + cst,
            Piece::TailRight { z0, g0 } | Piece::TailLeft { z0, g0 } => g0 * (z0 / x).powi(4),
        }
    }

    fn cauchy(&self, z: C64, rule: &Rule) -> C64 {
        match *self {
            Piece::Linear { a, b, ga, gb } => linear_cell(a, b, ga, gb, z),
            Piece::Log { c, a, b, cst } => {
                let dir = if a == c { 1.0 } else { -1.0 };
                geometric_panels(b - a, 60, rule)
                    .map(|(u, w)| w * (2.0 * u.ln() + cst) / (c + dir * u - z))
                    .sum()
            }
            Piece::TailRight { z0, g0 } => tail_integral(z0, g0, z, rule),
            Piece::TailLeft { z0, g0 } => -tail_integral(-z0, g0, -z, rule),
        }
    }

    fn is_tail(&self) -> bool {
        matches!(self, Piece::TailRight { .. } | Piece::TailLeft { .. })
    }
}

type Rule = (Vec<f64>, Vec<f64>);

/// Gauss nodes on `[width 2^-(k+1), width 2^-k]`, `k < levels`.
fn geometric_panels(width: f64, levels: usize, rule: &Rule) -> impl Iterator<Item = (f64, f64)> + '_ {
    (0..levels).flat_map(move |k| {
        let top = width * 0.5f64.powi(k as i32);
        gauss_panel(0.5 * top, top, rule)
    })
}

impl ReflectionTable {
    /// General layout, `g = log(1 - |r|^2)`.
    pub fn new(zeta: Vec<f64>, r: Vec<C64>, generic: bool) -> Result<Self> {
        let g = r
            .iter()
            .map(|r| nu_of(*r).map(|nu| -2.0 * PI * nu))
            .collect::<Result<Vec<_>>>()?;
        Self::with_log_weight(zeta, r, g, generic)
    }

    /// General layout with explicit log-weights. A knot `g(0) = 0` is
    /// inserted when the grid straddles the origin.
    pub fn with_log_weight(zeta: Vec<f64>, r: Vec<C64>, g: Vec<f64>, generic: bool) -> Result<Self> {
        validate(&zeta, &r, &g)?;
        if zeta.iter().any(|z| *z == 0.0 || z.abs() == 1.0) {
            return Err(Error::invalid("reflection table may not contain 0 or +-1"));
        }
        let (mut zeta, mut r, mut g) = (zeta, r, g);
        let k = zeta.partition_point(|z| *z < 0.0);
        if k > 0 && k < zeta.len() {
            zeta.insert(k, 0.0);
            r.insert(k, C64::new(0.0, 0.0));
            g.insert(k, 0.0);
        }
        Ok(ReflectionTable {
            zeta,
            r,
            g,
            generic,
            layout: TableLayout::General,
        })
    }

    /// Reciprocal layout from samples on `(1, Z]`.
    pub fn reciprocal(zeta: Vec<f64>, r: Vec<C64>, g: Vec<f64>, generic: bool) -> Result<Self> {
        validate(&zeta, &r, &g)?;
        if !(zeta[0] > 1.0) {
            return Err(Error::invalid("reciprocal table samples must lie in (1, Z]"));
        }
        Ok(ReflectionTable {
            zeta,
            r,
            g,
            generic,
            layout: TableLayout::Reciprocal,
        })
    }

    /// A table with `r = 0` on `grid`.
    pub fn reflectionless(grid: &[f64]) -> Result<Self> {
        Self::new(grid.to_vec(), vec![C64::new(0.0, 0.0); grid.len()], false)
    }

    /// Samples `r` on `(1, Z]` and stores `g = log(1 - |r|^2)`, taken as
    /// `-2 log|a|` where `|r|` is close to 1.
    pub fn from_scatterer(s: &Scatterer, cfg: &TableConfig, generic: bool) -> Result<Self> {
        let grid = cfg.base_points();
        let samples = grid
            .par_iter()
            .map(|&z| s.sample(z))
            .collect::<Result<Vec<_>>>()?;
        let r: Vec<C64> = samples.iter().map(|s| s.r).collect();
        let g: Vec<f64> = samples
            .iter()
            .map(|s| {
                let m = s.r.norm_sqr();
                let g = if m < 0.5 { (-m).ln_1p() } else { -2.0 * s.a.norm().ln() };
                g.min(0.0)
            })
            .collect();
        Self::reciprocal(grid, r, g, generic)
    }

    pub fn zeta(&self) -> &[f64] {
        &self.zeta
    }

    pub fn r(&self) -> &[C64] {
        &self.r
    }

    pub fn log_weight(&self) -> &[f64] {
        &self.g
    }

    /// The pieces of `g`: on the whole line (general layout) or on
    /// `[1, inf)` (reciprocal layout).
    fn pieces(&self) -> Vec<Piece> {
        let n = self.zeta.len();
        let mut out = Vec::with_capacity(n + 4);
        let (z, g) = (&self.zeta, &self.g);
        match self.layout {
            TableLayout::General => {
                out.push(Piece::TailLeft { z0: z[0], g0: g[0] });
                for i in 0..n - 1 {
                    let (a, b) = (z[i], z[i + 1]);
                    let sing = [-1.0, 1.0].into_iter().find(|&c| a < c && c < b);
                    match sing {
                        Some(c) if self.generic => {
                            out.push(Piece::Log { c, a, b: c, cst: g[i] - 2.0 * (c - a).ln() });
                            out.push(Piece::Log { c, a: c, b, cst: g[i + 1] - 2.0 * (b - c).ln() });
                        }
                        _ => out.push(Piece::Linear { a, b, ga: g[i], gb: g[i + 1] }),
                    }
                }
                out.push(Piece::TailRight { z0: z[n - 1], g0: g[n - 1] });
            }
            TableLayout::Reciprocal => {
                if self.generic {
                    out.push(Piece::Log { c: 1.0, a: 1.0, b: z[0], cst: g[0] - 2.0 * (z[0] - 1.0).ln() });
                } else {
                    out.push(Piece::Linear { a: 1.0, b: z[0], ga: g[0], gb: g[0] });
                }
                for i in 0..n - 1 {
                    out.push(Piece::Linear { a: z[i], b: z[i + 1], ga: g[i], gb: g[i + 1] });
                }
                out.push(Piece::TailRight { z0: z[n - 1], g0: g[n - 1] });
            }
        }
        out
    }

    fn locate(pieces: &[Piece], x: f64) -> f64 {
        let idx = pieces.partition_point(|p| match *p {
            Piece::Linear { b, .. } | Piece::Log { b, .. } => b < x,
            Piece::TailLeft { z0, .. } => z0 < x,
            Piece::TailRight { .. } => false,
        });
        pieces[idx.min(pieces.len() - 1)].eval(x)
    }

    /// Interpolated `g(zeta)`, with the tail model outside the support.
    pub fn g_at(&self, x: f64) -> f64 {
        let pieces = self.pieces();
        self.g_with(&pieces, x)
    }

    fn g_with(&self, pieces: &[Piece], x: f64) -> f64 {
        match self.layout {
            TableLayout::General => Self::locate(pieces, x),
            TableLayout::Reciprocal => {
                let y = x.abs();
                if y == 0.0 {
                    return 0.0;
                }
                Self::locate(pieces, if y < 1.0 { 1.0 / y } else { y })
            }
        }
    }

    /// `g(c + v)` for `c = +-1`, keeping the logarithm exact when `v` is far
    /// below the spacing of floats near `c`.
    fn g_near(&self, pieces: &[Piece], c: f64, v: f64) -> f64 {
        let (c, v) = match self.layout {
            // g is even and g(1/x) = g(x): move the offset to the right of +1
            TableLayout::Reciprocal => {
                let w = if c < 0.0 { -v } else { v };
                (1.0, if w < 0.0 { -w / (1.0 + w) } else { w })
            }
            TableLayout::General => (c, v),
        };
        let x = c + v;
        let idx = pieces.partition_point(|p| match *p {
            Piece::Linear { b, .. } | Piece::Log { b, .. } => b < x,
            Piece::TailLeft { z0, .. } => z0 < x,
            Piece::TailRight { .. } => false,
        });
        match pieces[idx.min(pieces.len() - 1)] {
            Piece::Log { c: pc, cst, .. } if pc == c => 2.0 * v.abs().ln() + cst,
            ref p if self.layout == TableLayout::General => p.eval(x),
            _ => self.g_with(pieces, x),
        }
    }

    /// `C(z) = int g / (zeta - z)` for `Im z != 0`, together with the size of
    /// the tail contribution beyond the sampled support.
    pub fn cauchy(&self, z: C64) -> Result<(C64, f64)> {
        if z.im == 0.0 || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::invalid("Cauchy integral is evaluated off the real axis only"));
        }
        let rule = gauss_legendre(8);
        let pieces = self.pieces();
        let half = |w: C64| -> (C64, C64) {
            let mut body = C64::new(0.0, 0.0);
            let mut tail = C64::new(0.0, 0.0);
            for p in &pieces {
                let v = p.cauchy(w, &rule);
                if p.is_tail() {
                    tail += v;
                } else {
                    body += v;
                }
            }
            (body, tail)
        };
        Ok(match self.layout {
            TableLayout::General => {
                let (b, t) = half(z);
                (b + t, t.norm())
            }
            TableLayout::Reciprocal => {
                // C(z) = I(z) - I(-z) - I(1/z) + I(-1/z), I(w) = int_1^inf g / (u - w)
                let zi = z.inv();
                let parts = [(z, 1.0), (-z, -1.0), (zi, -1.0), (-zi, 1.0)];
                let mut total = C64::new(0.0, 0.0);
                let mut tail = 0.0;
                for (w, sign) in parts {
                    let (b, t) = half(w);
                    total += (b + t) * sign;
                    tail += t.norm();
                }
                (total, tail)
            }
        })
    }

    /// `delta(z)` and the tail bound of its exponent.
    pub fn delta(&self, z: C64) -> Result<(C64, f64)> {
        let (c, tail) = self.cauchy(z)?;
        Ok(((I / (2.0 * PI) * c).exp(), tail / (2.0 * PI)))
    }

    /// Breakpoints of the interpolant on the sampled part of the line.
    fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = match self.layout {
            TableLayout::General => self.zeta.clone(),
            TableLayout::Reciprocal => self
                .zeta
                .iter()
                .flat_map(|&z| [z, 1.0 / z, -z, -1.0 / z])
                .chain([0.0])
                .collect(),
        };
        if self.generic {
            b.extend([-1.0, 1.0]);
        }
        b.sort_by(|a, c| a.total_cmp(c));
        b.dedup();
        b
    }

    /// `PV int g(zeta) / (zeta - 1) d zeta`.
    ///
    /// The window `|zeta - 1| < 1/2` is folded into
    /// `int_0^{1/2} [g(1+u) - g(1-u)] / u du` on panels that respect the
    /// interpolant's breakpoints, with geometric panels toward `u = 0`; the
    /// rest of the line uses Gauss panels between breakpoints, geometric
    /// panels into the logarithmic cells at `-1`, and closed-form tails.
    pub fn pv_at_one(&self, order: usize) -> f64 {
        const W: f64 = 0.5;
        let rule = gauss_legendre(order);
        let pieces = self.pieces();
        let g = |x: f64| self.g_with(&pieces, x);
        let bp = self.breakpoints();
        let (lo, hi) = (bp[0], bp[bp.len() - 1]);

        let mut outer = 0.0;
        let mut cuts: Vec<f64> = bp.iter().copied().filter(|x| (x - 1.0).abs() > W).collect();
        cuts.extend([1.0 - W, 1.0 + W]);
        cuts.sort_by(|a, c| a.total_cmp(c));
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a >= 1.0 - W && b <= 1.0 + W {
                continue;
            }
            let singular = self.generic && (a == -1.0 || b == -1.0);
            if singular {
                let (c, dir) = if a == -1.0 { (a, 1.0) } else { (b, -1.0) };
                outer += geometric_panels(b - a, 60, &rule)
                    .map(|(u, wt)| {
                        let x = c + dir * u;
                        wt * self.g_near(&pieces, c, dir * u) / (x - 1.0)
                    })
                    .sum::<f64>();
            } else {
                outer += gauss_panel(a, b, &rule).map(|(x, wt)| wt * g(x) / (x - 1.0)).sum::<f64>();
            }
        }
        let tails = match self.layout {
            TableLayout::General => {
                let n = self.g.len();
                tail_integral(hi, self.g[n - 1], ONE, &rule).re - tail_integral(-lo, self.g[0], -ONE, &rule).re
            }
            TableLayout::Reciprocal => {
                let n = self.g.len();
                tail_integral(hi, self.g[n - 1], ONE, &rule).re - tail_integral(hi, self.g[n - 1], -ONE, &rule).re
            }
        };

        let mut ucuts: Vec<f64> = bp
            .iter()
            .map(|x| (x - 1.0).abs())
            .filter(|u| *u > 0.0 && *u < W)
            .chain([W])
            .collect();
        ucuts.sort_by(|a, c| a.total_cmp(c));
        ucuts.dedup();
        let paired = |u: f64| (self.g_near(&pieces, 1.0, u) - self.g_near(&pieces, 1.0, -u)) / u;
        let mut inner: f64 = ucuts
            .windows(2)
            .map(|w| gauss_panel(w[0], w[1], &rule).map(|(u, wt)| wt * paired(u)).sum::<f64>())
            .sum();
        // below the closest sample: the folded integrand stays bounded
        // unless a general-layout table carries mismatched log constants
        if !(self.generic && self.layout == TableLayout::General) {
            inner += geometric_panels(ucuts[0], 64, &rule).map(|(u, wt)| wt * paired(u)).sum::<f64>();
        }
        inner + outer + tails
    }
}

fn validate(zeta: &[f64], r: &[C64], g: &[f64]) -> Result<()> {
    if zeta.len() != r.len() || zeta.len() != g.len() || zeta.len() < 2 {
        return Err(Error::invalid("reflection table needs matching arrays of length >= 2"));
    }
    if zeta.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("reflection table grid must be strictly increasing"));
    }
    if g.iter().any(|g| !g.is_finite() || *g > 1e-14) {
        return Err(Error::invalid("log-weight must be finite and nonpositive"));
    }
    Ok(())
}

/// `int_a^b (ga + s (zeta - a)) / (zeta - z)` for `z` off the segment.
fn linear_cell(a: f64, b: f64, ga: f64, gb: f64, z: C64) -> C64 {
    let s = (gb - ga) / (b - a);
    let w = C64::new(b - a, 0.0) / (a - z);
    (ga + s * (z - a)) * log1p(w) + s * (b - a)
}

/// `log(1 + w)` accurate for small `w`.
fn log1p(w: C64) -> C64 {
    let re = 0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p();
    let im = w.im.atan2(1.0 + w.re);
    C64::new(re, im)
}

/// `int_Z^inf g_Z (Z / zeta)^4 / (zeta - z)`; with `zeta = Z/u` this is
/// `g_Z int_0^1 u^3 / (1 - z u / Z) du`.
fn tail_integral(zend: f64, g_end: f64, z: C64, rule: &Rule) -> C64 {
    gauss_panel(0.0, 1.0, rule)
        .map(|(u, w)| w * u.powi(3) / (1.0 - z * u / zend))
        .sum::<C64>()
        * g_end
}

/// `h(z) = prod (z - eta_n) / (z - conj eta_n)`.
pub fn blaschke_h(z: C64, spectrum: &DiscreteSpectrum) -> Result<C64> {
    let mut h = ONE;
    for e in &spectrum.eigenvalues {
        let den = z - e.eta.conj();
        if den.norm() < 1e-14 {
            return Err(Error::invalid(format!("z = {z} hits the pole conj(eta) = {}", e.eta.conj())));
        }
        h *= (z - e.eta) / den;
    }
    Ok(h)
}

/// `delta(z)` for `Im z != 0`.
pub fn delta_at(z: C64, table: &ReflectionTable) -> Result<C64> {
    table.delta(z).map(|d| d.0)
}

/// `a(z) = h(z) delta(z)` for `Im z > 0`.
pub fn trace_reconstruct_a(z: C64, table: &ReflectionTable, spectrum: &DiscreteSpectrum) -> Result<C64> {
    if !(z.im > 0.0) {
        return Err(Error::invalid("trace formula is stated for Im z > 0"));
    }
    Ok(blaschke_h(z, spectrum)? * delta_at(z, table)?)
}

/// Whether `phi_0` includes the discrete-spectrum phase `arg h(1)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PhaseVariant {
    /// `arg conj r(1) - (1/pi) PV int g / (zeta - 1)`.
    #[default]
    Integral,
    /// The same plus `arg h(1)^2`.
    Blaschke,
}

/// Amplitude and phase of the modified reflection coefficient at `z = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseAtOne {
    pub p: f64,
    pub phi0: f64,
    pub generic: bool,
}

/// [`PhaseAtOne`] with the pieces it was assembled from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseDetails {
    pub phase: PhaseAtOne,
    pub variant: PhaseVariant,
    pub pv_integral: f64,
    pub blaschke_phase: f64,
    /// `(Gauss order, PV)` for the refinement ladder.
    pub history: Vec<(usize, f64)>,
    /// `p` was within `1e-6` of 1 and has been clamped.
    pub clamped: bool,
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

pub fn phi0_and_amp(
    table: &ReflectionTable,
    r1: &ReflectionAtOne,
    spectrum: &DiscreteSpectrum,
    variant: PhaseVariant,
) -> Result<PhaseDetails> {
    let mut p = r1.r1.norm();
    let mut generic = r1.generic;
    let mut clamped = false;
    if p >= 1.0 - 1e-6 {
        clamped = true;
        p = 1.0;
        generic = true;
    }
    let blaschke_phase = {
        let h = blaschke_h(ONE, spectrum)?;
        (h * h).arg()
    };
    if p == 0.0 {
        return Ok(PhaseDetails {
            phase: PhaseAtOne { p, phi0: 0.0, generic },
            variant,
            pv_integral: 0.0,
            blaschke_phase,
            history: Vec::new(),
            clamped,
        });
    }
    let history: Vec<(usize, f64)> = [8, 12, 16]
        .into_iter()
        .map(|order| (order, table.pv_at_one(order)))
        .collect();
    let pv = history[history.len() - 1].1;
    let spread = (history[history.len() - 1].1 - history[history.len() - 2].1).abs();
    if !pv.is_finite() || spread > 1e-6 * (1.0 + pv.abs()) {
        return Err(Error::NonConvergence {
            stage: "phi0_and_amp",
            detail: format!("principal value refinement history {history:?}"),
        });
    }
    let mut phi0 = r1.r1.conj().arg() - pv / PI;
    if variant == PhaseVariant::Blaschke {
        phi0 += blaschke_phase;
    }
    Ok(PhaseDetails {
        phase: PhaseAtOne {
            p,
            phi0: wrap_angle(phi0),
            generic,
        },
        variant,
        pv_integral: pv,
        blaschke_phase,
        history,
        clamped,
    })
}
