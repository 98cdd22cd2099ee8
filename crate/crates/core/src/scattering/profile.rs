use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default bound on `|q(x_min) + 1|` and `|q(x_max) - 1|`.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-10;

/// An initial datum sampled on a uniform grid, tending to `-1` on the left
/// and `+1` on the right.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialProfile {
    x0: f64,
    dx: f64,
    q: Vec<f64>,
    /// `max(|q(x_min) + 1|, |q(x_max) - 1|)`.
    pub tail: f64,
    /// Rough exponential decay rate of `|q -+ 1|` near the ends.
    pub decay_rate: Option<f64>,
}

impl InitialProfile {
    pub fn new(x: &[f64], q: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(x, q, DEFAULT_TRUNCATION_TOL)
    }

    pub fn with_tolerance(x: &[f64], q: Vec<f64>, tol: f64) -> Result<Self> {
        if x.len() != q.len() {
            return Err(Error::invalid(format!(
                "x and q lengths differ ({} vs {})",
                x.len(),
                q.len()
            )));
        }
        if x.len() < 8 {
            return Err(Error::invalid("profile needs at least 8 samples"));
        }
        if let Some(i) = q.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite q at sample {i}")));
        }
        let n = x.len();
        let dx = (x[n - 1] - x[0]) / (n - 1) as f64;
        for (i, w) in x.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::invalid(format!(
                    "x must be strictly increasing (sample {})",
                    i + 1
                )));
            }
            if ((w[1] - w[0]) - dx).abs() > 1e-6 * dx {
                return Err(Error::invalid(format!(
                    "x must be uniformly spaced (sample {})",
                    i + 1
                )));
            }
        }
        let left = (q[0] + 1.0).abs();
        let right = (q[n - 1] - 1.0).abs();
        let tail = left.max(right);
        if tail > tol {
            return Err(Error::NotDecayed(format!(
                "|q(x_min)+1| = {left:e}, |q(x_max)-1| = {right:e}, tolerance {tol:e}"
            )));
        }
        let decay_rate = estimate_decay(&q, dx);
        Ok(InitialProfile {
            x0: x[0],
            dx,
            q,
            tail,
            decay_rate,
        })
    }

    /// Samples `f` on `n` uniform points of `[x_min, x_max]`.
    pub fn from_fn(x_min: f64, x_max: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || !(x_max > x_min) {
            return Err(Error::invalid("profile grid needs n >= 2 and x_max > x_min"));
        }
        let dx = (x_max - x_min) / (n - 1) as f64;
        let x: Vec<f64> = (0..n).map(|i| x_min + i as f64 * dx).collect();
        let q = x.iter().map(|&v| f(v)).collect();
        Self::new(&x, q)
    }

    /// Parses a CSV with header `x,q`.
    pub fn from_csv(text: &str) -> Result<Self> {
        Self::from_csv_with_tolerance(text, DEFAULT_TRUNCATION_TOL)
    }

    pub fn from_csv_with_tolerance(text: &str, tol: f64) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty profile file".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["x", "q"] {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `x,q`, found `{}`", header.trim()),
            });
        }
        let mut x = Vec::new();
        let mut q = Vec::new();
        for (idx, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected 2 fields, found {}", fields.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("`{s}`: {e}"),
                })
            };
            x.push(parse(fields[0])?);
            q.push(parse(fields[1])?);
        }
        if x.is_empty() {
            return Err(Error::Parse {
                line: 2,
                message: "profile has no data rows".into(),
            });
        }
        Self::with_tolerance(&x, q, tol)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,q\n");
        for (x, q) in self.x().zip(&self.q) {
            out.push_str(&format!("{},{}\n", crate::fmt12(x), crate::fmt12(*q)));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x_min(&self) -> f64 {
        self.x0
    }

    pub fn x_max(&self) -> f64 {
        self.x_at(self.len() - 1)
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn x(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.x_at(i))
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Cubic Lagrange interpolation of `q` at `x`; boundary values outside.
    pub fn q_at(&self, x: f64) -> f64 {
        let n = self.len();
        if x <= self.x0 {
            return -1.0;
        }
        if x >= self.x_max() {
            return 1.0;
        }
        let u = (x - self.x0) / self.dx;
        let i = (u.floor() as usize).min(n - 2);
        let f = u - i as f64;
        let lo = i.saturating_sub(1).min(n - 4);
        let t = (i as f64 + f) - lo as f64;
        let p = |j: usize| self.q[lo + j];
        let l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        let l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        let l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        let l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        l0 * p(0) + l1 * p(1) + l2 * p(2) + l3 * p(3)
    }

    /// `integral (q^2 - 1) dx` by the trapezoid rule.
    pub fn mass(&self) -> f64 {
        let f: Vec<f64> = self.q.iter().map(|q| q * q - 1.0).collect();
        crate::quad::trapezoid(&f, self.dx)
    }
}

fn estimate_decay(q: &[f64], dx: f64) -> Option<f64> {
    // slope of log|q -+ 1| over the outer tenth on the right side
    let n = q.len();
    let m = (n / 10).max(2);
    let a = (q[n - 1 - m] - 1.0).abs();
    let b = (q[n - 1] - 1.0).abs();
    if a > 0.0 && b > 0.0 && a > b {
        Some((a / b).ln() / (m as f64 * dx))
    } else {
        None
    }
}
