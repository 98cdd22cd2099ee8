//! The Airy function and the Ablowitz-Segur family of Painleve II
//! solutions `u'' = 2 u^3 + s u` with `u(s) ~ -p Ai(s)` as `s -> +inf`.

use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64, I};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// `Ai(0)`.
pub const AI0: f64 = 0.355_028_053_887_817_2;
/// `-Ai'(0)`.
pub const AIP0: f64 = 0.258_819_403_792_806_8;

/// Bound of the supported range for [`airy_ai`].
pub const AIRY_RANGE: f64 = 20.0;

/// Above this `s` the Macdonald-function integral is used; below it the
/// Maclaurin series, continued by local Taylor steps on the negative axis.
pub const AIRY_SWITCH: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AiryValue {
    pub s: f64,
    pub ai: f64,
    pub aip: f64,
}

impl AiryValue {
    /// `int_s^inf Ai^2 = Ai'(s)^2 - s Ai(s)^2`.
    pub fn tail_square_integral(&self) -> f64 {
        self.aip * self.aip - self.s * self.ai * self.ai
    }
}

pub fn airy_ai(s: f64) -> Result<AiryValue> {
    if !(s.abs() <= AIRY_RANGE) {
        return Err(Error::OutOfRange {
            what: "Airy argument",
            value: s,
            min: -AIRY_RANGE,
            max: AIRY_RANGE,
        });
    }
    let (ai, aip) = if s > AIRY_SWITCH { airy_macdonald(s) } else { airy_taylor(s) };
    Ok(AiryValue { s, ai, aip })
}

/// Taylor expansion of the solution of `y'' = s y` through `(s0, y, y')`,
/// evaluated at `s0 + h`.
fn taylor_step(s0: f64, y: f64, dy: f64, h: f64) -> (f64, f64) {
    // (n+2)(n+1) c_{n+2} = s0 c_n + c_{n-1}
    let mut c = [y, dy, 0.5 * s0 * y];
    let (mut v, mut dv) = (y + dy * h + c[2] * h * h, dy + 2.0 * c[2] * h);
    let mut hp = h * h; // h^n for n = 2
    let mut quiet = 0;
    for n in 3..200 {
        let next = (s0 * c[1] + c[0]) / (n as f64 * (n - 1) as f64);
        c = [c[1], c[2], next];
        let dterm = n as f64 * next * hp;
        hp *= h;
        let term = next * hp;
        v += term;
        dv += dterm;
        quiet = if term.abs() < 1e-18 * (1.0 + v.abs()) && dterm.abs() < 1e-18 * (1.0 + dv.abs()) {
            quiet + 1
        } else {
            0
        };
        if quiet >= 3 {
            break;
        }
    }
    (v, dv)
}

const TAYLOR_STEP: f64 = 0.25;

fn airy_taylor(s: f64) -> (f64, f64) {
    if s >= 0.0 {
        return taylor_step(0.0, AI0, -AIP0, s);
    }
    let (mut y, mut dy) = (AI0, -AIP0);
    let mut s0 = 0.0;
    // fixed nodes, so nearby arguments share all but the last step
    while s0 - TAYLOR_STEP > s {
        (y, dy) = taylor_step(s0, y, dy, -TAYLOR_STEP);
        s0 -= TAYLOR_STEP;
    }
    taylor_step(s0, y, dy, s - s0)
}

/// `Ai = sqrt(s/3) K_{1/3}(zeta) / pi`, `Ai' = -s K_{2/3}(zeta) / (pi sqrt 3)`
/// with `K_nu(zeta) = int_0^inf exp(-zeta cosh t) cosh(nu t) dt` summed by
/// the trapezoid rule.
fn airy_macdonald(s: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * s.powf(1.5);
    let h = 0.05;
    let (mut k13, mut k23) = (0.5, 0.5);
    for j in 1..2000 {
        let t = j as f64 * h;
        let w = (-zeta * (t.cosh() - 1.0)).exp();
        k13 += w * (t / 3.0).cosh();
        k23 += w * (2.0 * t / 3.0).cosh();
        if w * (2.0 * t / 3.0).cosh() < 1e-18 {
            break;
        }
    }
    let e = h * (-zeta).exp();
    let ai = (s / 3.0).sqrt() * k13 * e / PI;
    let aip = -s * k23 * e / (PI * 3f64.sqrt());
    (ai, aip)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PIIConfig {
    /// Amplitude `p` in `u ~ -p Ai(s)`.
    pub p: f64,
    pub s_start: f64,
    pub s_min: f64,
    /// Spacing of the returned grid.
    pub output_step: f64,
    pub atol: f64,
    pub rtol: f64,
}

impl Default for PIIConfig {
    fn default() -> Self {
        PIIConfig {
            p: 0.5,
            s_start: 9.0,
            s_min: -10.0,
            output_step: 1e-2,
            atol: 1e-11,
            rtol: 1e-11,
        }
    }
}

impl PIIConfig {
    pub fn with_p(p: f64) -> Self {
        PIIConfig { p, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::OutOfRange {
                what: "Painleve amplitude p",
                value: self.p,
                min: 0.0,
                max: 1.0,
            });
        }
        if !(self.s_start >= 6.0 && self.s_start <= AIRY_RANGE) {
            return Err(Error::OutOfRange {
                what: "anchor s_start",
                value: self.s_start,
                min: 6.0,
                max: AIRY_RANGE,
            });
        }
        if !(self.s_min < self.s_start) {
            return Err(Error::invalid("s_min must lie below s_start"));
        }
        if !(self.output_step > 0.0 && self.atol > 0.0 && self.rtol >= 0.0) {
            return Err(Error::invalid("step and tolerances must be positive"));
        }
        Ok(())
    }
}

/// Solution on a descending uniform grid from `s_start` to `s_min`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PIISolution {
    pub p: f64,
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub uprime: Vec<f64>,
    /// `int_s^inf u^2`.
    pub tail: Vec<f64>,
    /// `p = 1`: the Hastings-McLeod-type boundary case.
    pub boundary_case: bool,
    pub steps: usize,
}

type State = [f64; 3];

fn rhs(s: f64, y: &State) -> State {
    [y[1], 2.0 * y[0].powi(3) + s * y[0], -y[0] * y[0]]
}

// Dormand-Prince 5(4)
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dp5_step(s: f64, y: &State, h: f64) -> (State, State) {
    let mut k = [[0.0; 3]; 7];
    for i in 0..7 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(i) {
            for d in 0..3 {
                yi[d] += h * A[i][j] * kj[d];
            }
        }
        k[i] = rhs(s + C[i] * h, &yi);
    }
    let mut y5 = *y;
    let mut err = [0.0; 3];
    for i in 0..7 {
        for d in 0..3 {
            y5[d] += h * B5[i] * k[i][d];
            err[d] += h * (B5[i] - B4[i]) * k[i][d];
        }
    }
    (y5, err)
}

const BLOW_UP: f64 = 1e8;

pub fn solve_pii(cfg: &PIIConfig) -> Result<PIISolution> {
    cfg.validate()?;
    let n = ((cfg.s_start - cfg.s_min) / cfg.output_step).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|j| cfg.s_start - j as f64 * cfg.output_step).collect();
    let anchor = airy_ai(cfg.s_start)?;
    let p = cfg.p;
    let mut y: State = [-p * anchor.ai, -p * anchor.aip, p * p * anchor.tail_square_integral()];
    let mut out = PIISolution {
        p,
        s: grid.clone(),
        u: Vec::with_capacity(n + 1),
        uprime: Vec::with_capacity(n + 1),
        tail: Vec::with_capacity(n + 1),
        boundary_case: p == 1.0,
        steps: 0,
    };
    let push = |out: &mut PIISolution, y: &State| {
        out.u.push(y[0]);
        out.uprime.push(y[1]);
        out.tail.push(y[2]);
    };
    push(&mut out, &y);
    let mut h = -cfg.output_step;
    let mut s = grid[0];
    for &target in &grid[1..] {
        while s > target {
            let last = s + h <= target;
            let step = if last { target - s } else { h };
            let (y5, e) = dp5_step(s, &y, step);
            let ratio = (0..3)
                .map(|d| e[d].abs() / (cfg.atol + cfg.rtol * y[d].abs().max(y5[d].abs())))
                .fold(0.0, f64::max);
            if ratio <= 1.0 {
                s = if last { target } else { s + step };
                y = y5;
                out.steps += 1;
                if y[0].abs() > BLOW_UP || !y[0].is_finite() {
                    return Err(Error::BlowUp {
                        location: s,
                        detail: format!("|u| = {:e} for p = {p}", y[0].abs()),
                    });
                }
            }
            let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            if ratio <= 1.0 && last {
                break;
            }
            h = (step * grow).max(-cfg.output_step);
            if h.abs() < 1e-12 {
                return Err(Error::BlowUp {
                    location: s,
                    detail: format!("step size collapsed to {:e}", h.abs()),
                });
            }
        }
        push(&mut out, &y);
    }
    Ok(out)
}

impl PIISolution {
    fn locate(&self, s: f64) -> Result<usize> {
        let (hi, lo) = (self.s[0], self.s[self.s.len() - 1]);
        if !(s >= lo && s <= hi) {
            return Err(Error::OutOfRange {
                what: "Painleve argument s",
                value: s,
                min: lo,
                max: hi,
            });
        }
        let h = self.s[0] - self.s[1];
        Ok((((hi - s) / h).floor() as usize).min(self.s.len() - 2))
    }

    /// `(u, u', I)` at `s` by cubic Hermite interpolation on the grid.
    pub fn eval(&self, s: f64) -> Result<(f64, f64, f64)> {
        let j = self.locate(s)?;
        let (s0, s1) = (self.s[j], self.s[j + 1]);
        let h = s1 - s0;
        let t = (s - s0) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t).powi(2),
            t * (1.0 - t).powi(2),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        let (d00, d10, d01, d11) = (
            6.0 * t * (t - 1.0) / h,
            (1.0 - t) * (1.0 - 3.0 * t),
            -6.0 * t * (t - 1.0) / h,
            t * (3.0 * t - 2.0),
        );
        let u = h00 * self.u[j] + h10 * h * self.uprime[j] + h01 * self.u[j + 1] + h11 * h * self.uprime[j + 1];
        let up = d00 * self.u[j] + d10 * self.uprime[j] + d01 * self.u[j + 1] + d11 * self.uprime[j + 1];
        let tail = h00 * self.tail[j] - h10 * h * self.u[j].powi(2) + h01 * self.tail[j + 1] - h11 * h * self.u[j + 1].powi(2);
        Ok((u, up, tail))
    }

    pub fn u_at(&self, s: f64) -> Result<f64> {
        self.eval(s).map(|v| v.0)
    }

    /// `|u'' - 2u^3 - s u|` at the interior nodes, with `u''` taken from a
    /// sixth-order central difference of the stored `u'`.
    pub fn residuals(&self) -> Vec<(f64, f64)> {
        const W: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
        let h = self.s[1] - self.s[0];
        (3..self.s.len().saturating_sub(3))
            .map(|j| {
                let upp: f64 = (0..3).map(|k| W[k] * (self.uprime[j + k + 1] - self.uprime[j - k - 1])).sum::<f64>() / h;
                let res = upp - 2.0 * self.u[j].powi(3) - self.s[j] * self.u[j];
                (self.s[j], res.abs())
            })
            .collect()
    }

    /// Largest residual over nodes with `s` in `[lo, hi]`.
    pub fn max_residual_on(&self, lo: f64, hi: f64) -> f64 {
        self.residuals()
            .into_iter()
            .filter(|(s, _)| *s >= lo && *s <= hi)
            .map(|(_, r)| r)
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,u,uprime,I\n");
        for j in 0..self.s.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                crate::fmt12(self.s[j]),
                crate::fmt12(self.u[j]),
                crate::fmt12(self.uprime[j]),
                crate::fmt12(self.tail[j])
            );
        }
        out
    }
}

/// `M_1(s) = (1/2) [[-i I(s), u(s)], [u(s), i I(s)]]`.
pub fn pii_m1(sol: &PIISolution, s: f64) -> Result<Mat2> {
    let (u, _, tail) = sol.eval(s)?;
    let d = -I * (0.5 * tail);
    let o = C64::new(0.5 * u, 0.0);
    Ok(Mat2::new(d, o, o, -d))
}
