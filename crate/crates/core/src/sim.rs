//! Pseudo-spectral reference solver for `q_t - 6 q^2 q_x + q_xxx = 0` with
//! `q -> -+1` at `-+inf`.
//!
//! The field is split as `q = B + v` with a background `B` that carries the
//! boundary values, so `v` decays at both ends and lives on a periodic grid.
//! The computation runs in the frame `X = x + c t` (default `c = 6`, which
//! keeps the edge `x = -6t` near `X = 0`), where
//! `q_t = (2 q^3 - c q)_X - q_XXX`. The stiff `-v_XXX` term is integrated
//! exactly by ETDRK4; the rest is explicit.

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::InitialProfile;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

/// `tanh(x + 2t)`, the exact kink.
pub fn kink_reference(x: f64, t: f64) -> f64 {
    (x + 2.0 * t).tanh()
}

/// Bound `max |q|` before a run is declared unstable.
pub const SANITY_BAND: f64 = 1.5;

/// Stability limit of classical RK4 on the imaginary axis.
const RK4_IMAG_STABILITY: f64 = 2.8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// The grid covers `X in [-L, L)`.
    pub half_width: f64,
    /// Power of two, at least 256.
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Fraction of the wavenumber range kept in the nonlinear term.
    pub dealias: f64,
    /// `true`: `B` is the moving kink `tanh(x + 2t)`. `false`: `B` is the
    /// frozen profile `tanh(X)`.
    pub subtract_background: bool,
    /// Speed `c` of the computational frame `X = x + c t`.
    pub frame_speed: f64,
    /// Widths of the absorbing layers at `X = -L` and `X = +L`.
    pub sponge_left: f64,
    pub sponge_right: f64,
    pub sponge_strength: f64,
    /// Largest `|v|` tolerated on the outermost tenth of each sponge.
    pub edge_tol: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            half_width: 200.0,
            n: 1 << 13,
            dt: 4e-3,
            t_final: 2.0,
            dealias: 2.0 / 3.0,
            subtract_background: true,
            frame_speed: 6.0,
            sponge_left: 40.0,
            sponge_right: 15.0,
            sponge_strength: 20.0,
            edge_tol: 1e-5,
        }
    }
}

impl SimConfig {
    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 256 || !self.n.is_power_of_two() {
            return Err(Error::invalid(format!("grid size {} must be a power of two >= 256", self.n)));
        }
        if !(self.half_width > 0.0 && self.dt > 0.0 && self.t_final >= 0.0) {
            return Err(Error::invalid("half_width and dt must be positive, t_final nonnegative"));
        }
        if !(self.dealias > 0.0 && self.dealias <= 1.0) {
            return Err(Error::invalid("dealias fraction must lie in (0, 1]"));
        }
        let sponges = self.sponge_left + self.sponge_right;
        if self.sponge_left < 0.0 || self.sponge_right < 0.0 || sponges >= 2.0 * self.half_width {
            return Err(Error::invalid("sponge layers must be nonnegative and fit in the domain"));
        }
        if !(self.sponge_strength >= 0.0 && self.edge_tol > 0.0) {
            return Err(Error::invalid("sponge strength and edge tolerance must be nonnegative"));
        }
        Ok(())
    }

    /// Explicit-part stability bound: `dt * max(a k_max, sigma) <= 2.8`,
    /// where `a = max |6 q^2 - c|` over the sanity band `|q| <= 1.5` is the
    /// local advection speed of the nonlinear flux and `k_max` the largest
    /// retained wavenumber. The `k^3` term is exact and does not enter.
    pub fn stability_bound(&self) -> f64 {
        let c = self.frame_speed;
        let a = (6.0 * SANITY_BAND * SANITY_BAND - c).abs().max(c.abs());
        let kmax = self.dealias * PI / self.dx();
        RK4_IMAG_STABILITY / (a * kmax).max(self.sponge_strength)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
enum Background {
    Kink,
    Frozen,
}

/// Field at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub half_width: f64,
    pub frame_speed: f64,
    background: Background,
    /// `v` on `X_j = -L + j dx`.
    pub v: Vec<f64>,
}

impl SimState {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.v.len() as f64
    }

    /// Frame coordinate of node `j`.
    pub fn frame_x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx()
    }

    /// Laboratory coordinate of node `j`.
    pub fn lab_x(&self, j: usize) -> f64 {
        self.frame_x(j) - self.frame_speed * self.t
    }

    fn background_at(&self, big_x: f64) -> f64 {
        background(self.background, big_x, self.t, self.frame_speed)
    }

    pub fn q(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.background_at(self.frame_x(j)) + self.v[j]).collect()
    }

    /// `q` at a laboratory point by trigonometric interpolation of `v`.
    pub fn q_at(&self, x: f64) -> Result<f64> {
        let big_x = x + self.frame_speed * self.t;
        let l = self.half_width;
        if !(big_x >= -l && big_x <= l) {
            return Err(Error::OutOfRange {
                what: "simulation frame coordinate",
                value: big_x,
                min: -l,
                max: l,
            });
        }
        let n = self.len();
        let mut buf: Vec<C64> = self.v.iter().map(|&v| C64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let theta = PI / l * (big_x + l);
        let mut acc = 0.0;
        for (j, c) in buf.iter().enumerate() {
            let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            let w = if j == n / 2 { 0.5 } else { 1.0 };
            let e = C64::from_polar(1.0, m * theta);
            acc += w * (c * e).re;
            if j == n / 2 {
                // the Nyquist mode splits between +-N/2 and stays real
                acc += w * (c * e.conj()).re;
            }
        }
        Ok(self.background_at(big_x) + acc / n as f64)
    }

    /// Largest `|v|` on nodes with frame coordinate `|X| >= L - width`.
    pub fn edge_amplitude(&self, left_width: f64, right_width: f64) -> f64 {
        (0..self.len())
            .filter(|&j| {
                let x = self.frame_x(j);
                x <= -self.half_width + left_width || x >= self.half_width - right_width
            })
            .map(|j| self.v[j].abs())
            .fold(0.0, f64::max)
    }
}

fn background(kind: Background, big_x: f64, t: f64, c: f64) -> f64 {
    match kind {
        Background::Kink => kink_reference(big_x - c * t, t),
        Background::Frozen => big_x.tanh(),
    }
}

/// `int (q^2 - 1)` by the trapezoid rule over one period. The integrand
/// decays at both ends, so there is no tail correction.
pub fn conserved_mass(state: &SimState) -> f64 {
    state.q().iter().map(|q| q * q - 1.0).sum::<f64>() * state.dx()
}

struct Etdrk4 {
    h: f64,
    e: Vec<C64>,
    e2: Vec<C64>,
    q: Vec<C64>,
    f1: Vec<C64>,
    f2: Vec<C64>,
    f3: Vec<C64>,
}

impl Etdrk4 {
    /// Coefficients by contour averaging, which avoids cancellation for
    /// small `|h L|`.
    fn new(lin: &[C64], h: f64) -> Self {
        const M: usize = 64;
        let roots: Vec<C64> = (0..M)
            .map(|j| C64::from_polar(1.0, PI * (j as f64 + 0.5) / (M as f64 / 2.0)))
            .collect();
        let n = lin.len();
        let mut out = Etdrk4 {
            h,
            e: Vec::with_capacity(n),
            e2: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
        };
        for &l in lin {
            let hl = l * h;
            out.e.push(hl.exp());
            out.e2.push((hl * 0.5).exp());
            let (mut q, mut f1, mut f2, mut f3) = (C64::default(), C64::default(), C64::default(), C64::default());
            for r in &roots {
                let z = hl + r;
                let ez = z.exp();
                let z3 = z * z * z;
                q += ((z * 0.5).exp() - 1.0) / z;
                f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                f2 += (2.0 + z + ez * (z - 2.0)) / z3;
                f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            let s = h / M as f64;
            out.q.push(q * s);
            out.f1.push(f1 * s);
            out.f2.push(f2 * s);
            out.f3.push(f3 * s);
        }
        out
    }
}

/// A running simulation, stepped in place.
pub struct Simulation {
    cfg: SimConfig,
    background: Background,
    x: Vec<f64>,
    k: Vec<f64>,
    mask: Vec<f64>,
    sponge: Vec<f64>,
    /// Residual of a frozen background, zero for the moving kink.
    forcing: Vec<f64>,
    lin: Vec<C64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scheme: Option<Etdrk4>,
    t: f64,
    vhat: Vec<C64>,
    pub steps: usize,
}

impl Simulation {
    pub fn new(cfg: &SimConfig, q0: impl Fn(f64) -> f64) -> Result<Self> {
        cfg.validate()?;
        let bound = cfg.stability_bound();
        if cfg.dt > bound {
            return Err(Error::Cfl { dt: cfg.dt, bound });
        }
        let n = cfg.n;
        let l = cfg.half_width;
        let dx = cfg.dx();
        let x: Vec<f64> = (0..n).map(|j| -l + j as f64 * dx).collect();
        let k: Vec<f64> = (0..n)
            .map(|j| {
                if j == n / 2 {
                    0.0
                } else if j < n / 2 {
                    PI / l * j as f64
                } else {
                    PI / l * (j as f64 - n as f64)
                }
            })
            .collect();
        let cut = cfg.dealias * (n / 2) as f64;
        let mask: Vec<f64> = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { (n - j) as f64 };
                if m <= cut && j != n / 2 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let ramp = |d: f64, w: f64| {
            if w <= 0.0 || d >= w {
                0.0
            } else {
                let s = 1.0 - d / w;
                (0.5 * PI * s).sin().powi(2)
            }
        };
        let sponge: Vec<f64> = x
            .iter()
            .map(|&xi| cfg.sponge_strength * (ramp(xi + l, cfg.sponge_left) + ramp(l - xi, cfg.sponge_right)))
            .collect();
        let background = if cfg.subtract_background { Background::Kink } else { Background::Frozen };
        let c = cfg.frame_speed;
        let forcing: Vec<f64> = match background {
            Background::Kink => vec![0.0; n],
            // B = tanh X: (2B^3 - cB)_X - B_XXX = (2 - c) sech^2 X
            Background::Frozen => x.iter().map(|&xi| (2.0 - c) / xi.cosh().powi(2)).collect(),
        };
        let lin: Vec<C64> = k.iter().map(|&kj| C64::new(0.0, kj * kj * kj)).collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut vhat: Vec<C64> = x
            .iter()
            .map(|&xi| C64::new(q0(xi) - background_value(background, xi, 0.0, c), 0.0))
            .collect();
        fwd.process(&mut vhat);
        let sim = Simulation {
            cfg: *cfg,
            background,
            x,
            k,
            mask,
            sponge,
            forcing,
            lin,
            fwd,
            inv,
            scheme: None,
            t: 0.0,
            vhat,
            steps: 0,
        };
        sim.check_sanity()?;
        Ok(sim)
    }

    /// Starts from an [`InitialProfile`], interpolated onto the frame grid;
    /// outside its support the boundary values are used.
    pub fn from_profile(cfg: &SimConfig, profile: &InitialProfile) -> Result<Self> {
        Self::new(cfg, |x| profile.q_at(x))
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn state(&self) -> SimState {
        let mut buf = self.vhat.clone();
        self.inv.process(&mut buf);
        let n = self.cfg.n as f64;
        SimState {
            t: self.t,
            half_width: self.cfg.half_width,
            frame_speed: self.cfg.frame_speed,
            background: self.background,
            v: buf.iter().map(|c| c.re / n).collect(),
        }
    }

    fn nonlinear(&self, vhat: &[C64], t: f64) -> Vec<C64> {
        let n = self.cfg.n;
        let c = self.cfg.frame_speed;
        let mut v = vhat.to_vec();
        self.inv.process(&mut v);
        let scale = 1.0 / n as f64;
        let mut flux: Vec<C64> = Vec::with_capacity(n);
        let mut source: Vec<C64> = Vec::with_capacity(n);
        for (j, vj) in v.iter().enumerate() {
            let vj = vj.re * scale;
            let b = background_value(self.background, self.x[j], t, c);
            let q = b + vj;
            let f = 2.0 * (q * q * q - b * b * b) - c * vj;
            flux.push(C64::new(f, 0.0));
            source.push(C64::new(self.forcing[j] - self.sponge[j] * vj, 0.0));
        }
        self.fwd.process(&mut flux);
        self.fwd.process(&mut source);
        (0..n)
            .map(|j| (flux[j] * C64::new(0.0, self.k[j]) + source[j]) * self.mask[j])
            .collect()
    }

    fn step(&mut self, h: f64) {
        let rebuild = self.scheme.as_ref().is_none_or(|s| (s.h - h).abs() > 1e-15 * h);
        if rebuild {
            self.scheme = Some(Etdrk4::new(&self.lin, h));
        }
        let s = self.scheme.as_ref().expect("scheme built above");
        let n = self.cfg.n;
        let v = &self.vhat;
        let nv = self.nonlinear(v, self.t);
        let a: Vec<C64> = (0..n).map(|j| s.e2[j] * v[j] + s.q[j] * nv[j]).collect();
        let na = self.nonlinear(&a, self.t + 0.5 * h);
        let b: Vec<C64> = (0..n).map(|j| s.e2[j] * v[j] + s.q[j] * na[j]).collect();
        let nb = self.nonlinear(&b, self.t + 0.5 * h);
        let cc: Vec<C64> = (0..n).map(|j| s.e2[j] * a[j] + s.q[j] * (nb[j] * 2.0 - nv[j])).collect();
        let nc = self.nonlinear(&cc, self.t + h);
        let next: Vec<C64> = (0..n)
            .map(|j| s.e[j] * v[j] + nv[j] * s.f1[j] + (na[j] + nb[j]) * 2.0 * s.f2[j] + nc[j] * s.f3[j])
            .collect();
        self.vhat = next;
        self.t += h;
        self.steps += 1;
    }

    fn check_sanity(&self) -> Result<()> {
        let st = self.state();
        let q = st.q();
        if let Some(j) = q.iter().position(|q| !(q.abs() <= SANITY_BAND)) {
            return Err(Error::NonConvergence {
                stage: "simulate",
                detail: format!("|q| = {} left the band {SANITY_BAND} at x = {} (t = {})", q[j].abs(), st.lab_x(j), self.t),
            });
        }
        let edge = st.edge_amplitude(0.1 * self.cfg.sponge_left, 0.1 * self.cfg.sponge_right);
        if edge > self.cfg.edge_tol {
            return Err(Error::Contamination {
                time: self.t,
                amplitude: edge,
                tolerance: self.cfg.edge_tol,
            });
        }
        Ok(())
    }

    /// Advances to `t_end` with equal steps no longer than `dt`.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        let span = t_end - self.t;
        if span < -1e-12 {
            return Err(Error::invalid(format!("cannot step backward from t = {} to {t_end}", self.t)));
        }
        if span <= 1e-12 {
            return Ok(());
        }
        let m = (span / self.cfg.dt - 1e-9).ceil().max(1.0) as usize;
        let h = span / m as f64;
        let t0 = self.t;
        for i in 0..m {
            self.step(h);
            self.t = t0 + (i + 1) as f64 * h;
            if (i + 1) % 20 == 0 || i + 1 == m {
                self.check_sanity()?;
            }
        }
        Ok(())
    }
}

fn background_value(kind: Background, big_x: f64, t: f64, c: f64) -> f64 {
    background(kind, big_x, t, c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub t: f64,
    pub mass: f64,
    pub drift: f64,
    pub edge_amplitude: f64,
}

/// Snapshots at requested times and the conservation ledger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimHistory {
    pub config: SimConfig,
    pub snapshots: Vec<SimState>,
    pub ledger: Vec<LedgerEntry>,
    pub steps: usize,
    pub stability_bound: f64,
}

impl SimHistory {
    pub fn at(&self, t: f64) -> Option<&SimState> {
        self.snapshots.iter().find(|s| (s.t - t).abs() < 1e-9)
    }

    pub fn final_state(&self) -> &SimState {
        self.snapshots.last().expect("history holds the initial state")
    }

    pub fn max_mass_drift(&self) -> f64 {
        self.ledger.iter().map(|e| e.drift.abs()).fold(0.0, f64::max)
    }

    pub fn manifest(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "stability_bound": self.stability_bound,
            "steps": self.steps,
            "ledger": self.ledger,
        })
    }
}

/// Snapshot CSV in laboratory coordinates.
pub fn snapshot_csv(state: &SimState) -> String {
    let q = state.q();
    let mut out = String::from("x,q\n");
    for (j, qj) in q.iter().enumerate() {
        let _ = writeln!(out, "{},{}", crate::fmt12(state.lab_x(j)), crate::fmt12(*qj));
    }
    out
}

/// Runs `q0` to `cfg.t_final`, recording the initial state, every time in
/// `times` (sorted, deduplicated, clipped to `t_final`) and the final state.
pub fn evolve_fn(q0: impl Fn(f64) -> f64, times: &[f64], cfg: &SimConfig) -> Result<SimHistory> {
    let mut sim = Simulation::new(cfg, q0)?;
    run(&mut sim, times)
}

pub fn evolve(profile: &InitialProfile, times: &[f64], cfg: &SimConfig) -> Result<SimHistory> {
    let mut sim = Simulation::from_profile(cfg, profile)?;
    run(&mut sim, times)
}

fn run(sim: &mut Simulation, times: &[f64]) -> Result<SimHistory> {
    let cfg = *sim.config();
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::invalid("snapshot times must be finite and nonnegative"));
    }
    let mut ts: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0 && t <= cfg.t_final).collect();
    ts.push(cfg.t_final);
    ts.sort_by(|a, b| a.total_cmp(b));
    ts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let first = sim.state();
    let m0 = conserved_mass(&first);
    let entry = |s: &SimState| LedgerEntry {
        t: s.t,
        mass: conserved_mass(s),
        drift: conserved_mass(s) - m0,
        edge_amplitude: s.edge_amplitude(0.1 * cfg.sponge_left, 0.1 * cfg.sponge_right),
    };
    let mut ledger = vec![entry(&first)];
    let mut snapshots = vec![first];
    for &t in &ts {
        if t <= 0.0 {
            continue;
        }
        sim.advance_to(t)?;
        let s = sim.state();
        ledger.push(entry(&s));
        snapshots.push(s);
    }
    Ok(SimHistory {
        config: cfg,
        snapshots,
        ledger,
        steps: sim.steps,
        stability_bound: cfg.stability_bound(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(x: f64) -> f64 {
        x.tanh() + 0.3 * (-x * x).exp()
    }

    fn small(t_final: f64) -> SimConfig {
        SimConfig { t_final, ..Default::default() }
    }

    #[test]
    fn kink_reference_values() {
        assert_eq!(kink_reference(0.3, 0.0), 0.3f64.tanh());
        assert!((kink_reference(60.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((kink_reference(-60.0, 1.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn kink_reference_solves_the_equation() {
        // eighth-order central differences in x, sixth-order in t
        let h = 0.0125;
        let t = 1.0;
        let q = |x: f64, t: f64| kink_reference(x, t);
        let d1 = |f: &dyn Fn(f64) -> f64, x: f64, h: f64| {
            let c = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
            (0..4).map(|k| c[k] * (f(x + (k + 1) as f64 * h) - f(x - (k + 1) as f64 * h))).sum::<f64>() / h
        };
        let d3 = |f: &dyn Fn(f64) -> f64, x: f64, h: f64| {
            let c = [-488.0 / 240.0, 338.0 / 240.0, -72.0 / 240.0, 7.0 / 240.0];
            (0..4).map(|k| c[k] * (f(x + (k + 1) as f64 * h) - f(x - (k + 1) as f64 * h))).sum::<f64>() / (h * h * h)
        };
        let mut worst: f64 = 0.0;
        let mut x = -10.0;
        while x <= 10.0 {
            let qt = d1(&|s| q(x, s), t, h);
            let qx = d1(&|s| q(s, t), x, h);
            let qxxx = d3(&|s| q(s, t), x, h);
            let v = q(x, t);
            worst = worst.max((qt - 6.0 * v * v * qx + qxxx).abs());
            x += 0.05;
        }
        assert!(worst < 1e-9, "residual {worst:e}");
    }

    #[test]
    fn kink_is_preserved() {
        let cfg = SimConfig::default();
        let hist = evolve_fn(f64::tanh, &[], &cfg).unwrap();
        let s = hist.final_state();
        assert_eq!(s.t, 2.0);
        let q = s.q();
        let err = (0..s.len())
            .map(|j| (q[j] - (s.lab_x(j) + 4.0).tanh()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "{err:e}");
    }

    #[test]
    fn mass_of_kink() {
        let cfg = SimConfig::default();
        let sim = Simulation::new(&cfg, f64::tanh).unwrap();
        assert!((conserved_mass(&sim.state()) + 2.0).abs() < 1e-12);
        let state = SimState { t: 3.7, ..sim.state() };
        assert!((conserved_mass(&state) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn mass_is_conserved() {
        let hist = evolve_fn(bump, &[0.5], &small(1.0)).unwrap();
        assert!(hist.max_mass_drift() < 1e-6, "{:?}", hist.ledger);
    }

    #[test]
    fn frames_agree() {
        let lab = evolve_fn(bump, &[], &SimConfig { dt: 2e-3, ..small(1.0) }).unwrap();
        let moving = evolve_fn(bump, &[], &SimConfig { frame_speed: 0.0, ..small(1.0) }).unwrap();
        for x in [-8.0, -3.0, 0.0, 2.5] {
            let a = lab.final_state().q_at(x).unwrap();
            let b = moving.final_state().q_at(x).unwrap();
            assert!((a - b).abs() < 1e-8, "{x}: {a} {b}");
        }
    }

    #[test]
    fn frozen_background_agrees() {
        let a = evolve_fn(bump, &[], &small(1.0)).unwrap();
        let b = evolve_fn(bump, &[], &SimConfig { subtract_background: false, ..small(1.0) }).unwrap();
        let (qa, qb) = (a.final_state().q(), b.final_state().q());
        let d = qa.iter().zip(&qb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        // the two splittings carry different time-stepping errors
        assert!(d < 5e-7, "{d:e}");
    }

    #[test]
    fn temporal_convergence() {
        let a = evolve_fn(bump, &[], &small(1.0)).unwrap();
        let b = evolve_fn(bump, &[], &SimConfig { dt: 2e-3, ..small(1.0) }).unwrap();
        let (qa, qb) = (a.final_state().q(), b.final_state().q());
        let d = qa.iter().zip(&qb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(d < 1e-7, "{d:e}");
    }

    #[test]
    fn spatial_convergence() {
        let a = evolve_fn(bump, &[], &small(1.0)).unwrap();
        let b = evolve_fn(bump, &[], &SimConfig { n: 1 << 14, ..small(1.0) }).unwrap();
        let (qa, qb) = (a.final_state().q(), b.final_state().q());
        let d = (0..qa.len()).map(|j| (qa[j] - qb[2 * j]).abs()).fold(0.0, f64::max);
        assert!(d < 1e-8, "{d:e}");
    }

    #[test]
    fn trig_interpolation_hits_nodes() {
        let hist = evolve_fn(bump, &[], &small(0.2)).unwrap();
        let s = hist.final_state();
        let q = s.q();
        for j in [100, 4096, 6000] {
            assert!((s.q_at(s.lab_x(j)).unwrap() - q[j]).abs() < 1e-12);
        }
        assert!(s.q_at(1e3).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(
            Simulation::new(&SimConfig { dt: 0.05, ..Default::default() }, f64::tanh),
            Err(Error::Cfl { .. })
        ));
        assert!(Simulation::new(&SimConfig { n: 1000, ..Default::default() }, f64::tanh).is_err());
        assert!(Simulation::new(&SimConfig { n: 128, ..Default::default() }, f64::tanh).is_err());
    }

    #[test]
    fn detects_contamination() {
        // a bump parked inside the right edge layer
        let cfg = SimConfig { sponge_strength: 0.0, ..small(0.1) };
        let r = evolve_fn(|x| x.tanh() + 1e-2 * (-(x - 199.0).powi(2)).exp(), &[], &cfg);
        assert!(matches!(r, Err(Error::Contamination { .. })), "{r:?}");
    }

    #[test]
    fn history_and_exports() {
        let hist = evolve_fn(bump, &[0.1, 0.05, 0.1, 7.0], &small(0.2)).unwrap();
        let ts: Vec<f64> = hist.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 4);
        assert!((ts[1] - 0.05).abs() < 1e-12 && (ts[3] - 0.2).abs() < 1e-12);
        assert!(hist.at(0.1).is_some());
        let csv = snapshot_csv(hist.final_state());
        assert!(csv.starts_with("x,q\n"));
        assert_eq!(csv.lines().count(), 8193);
        let m = hist.manifest();
        assert_eq!(m["ledger"].as_array().unwrap().len(), 4);
    }
}
