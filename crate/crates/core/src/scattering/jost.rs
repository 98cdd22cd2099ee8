//! Modified Jost solutions of the x-part of the Lax pair.
//!
//! `Phi_x = X Phi` with `X = i k sigma_3 + Q`, `Q = [[0, q], [q, 0]]`. The
//! modified solutions `mu = Phi e^{-i lambda x sigma_3}` tend to
//! `E_+-(z) = [[1, +-i/z], [-+i/z, 1]]` at `x -> +-inf`. Each column is
//! propagated cell by cell with a fourth-order Magnus step
//! (two Gauss nodes, exact 2x2 exponential) and the scalar gauge factor
//! `e^{-+i lambda h}`, starting from `E_+-` at the truncated endpoint.
//! `mu_+` is swept right to left and `mu_-` left to right; in the upper
//! half-plane these are the stable directions for `mu_{+,1}` and
//! `mu_{-,2}`.
//!
//! Because the Magnus propagator only depends on `k(z)` and has unit
//! determinant, the Wronskian identities and the `z -> -z`, `z -> 1/z`
//! symmetries survive discretisation up to rounding. At `z = +-1`
//! (`lambda = 0`) the constant-background propagator degenerates to the
//! polynomial kernel `I + h X_+-` and the exponential switches to its Taylor
//! branch.

use super::profile::InitialProfile;
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2, C64, I, ONE};
use crate::spectral::{uniformize, SpectralPoint};

const SQRT3: f64 = 1.732_050_807_568_877_2;
const GAUSS_LO: f64 = 0.5 - SQRT3 / 6.0;
const GAUSS_HI: f64 = 0.5 + SQRT3 / 6.0;

/// Boundary matrix `E_+` (`sign = 1`) or `E_-` (`sign = -1`).
pub fn boundary_matrix(z: C64, sign: f64) -> Mat2 {
    let off = I * sign / z;
    Mat2::new(ONE, off, -off, ONE)
}

/// Which normalisation end a Jost solution is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// The x-part of the Lax pair on a sampled profile, with the potential
/// pre-evaluated at the Gauss nodes of every cell.
#[derive(Clone, Debug)]
pub struct LaxOperator {
    x0: f64,
    dx: f64,
    n: usize,
    /// `q` at `x_i + c_lo dx` and `x_i + c_hi dx` for cell `i`.
    nodes: Vec<[f64; 2]>,
}

impl LaxOperator {
    pub fn new(profile: &InitialProfile) -> Self {
        let dx = profile.dx();
        let n = profile.len();
        let nodes = (0..n - 1)
            .map(|i| {
                let x = profile.x_at(i);
                [profile.q_at(x + GAUSS_LO * dx), profile.q_at(x + GAUSS_HI * dx)]
            })
            .collect();
        LaxOperator {
            x0: profile.x_min(),
            dx,
            n,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Forward Magnus propagator over cell `i`, `Phi(x_{i+1}) = P Phi(x_i)`.
    fn cell_propagator(&self, i: usize, k: C64) -> Mat2 {
        let ik = I * k;
        let lax = |q: f64| Mat2::new(ik, C64::new(q, 0.0), C64::new(q, 0.0), -ik);
        let [q1, q2] = self.nodes[i];
        let a1 = lax(q1);
        let a2 = lax(q2);
        let h = self.dx;
        let omega = (a1 + a2).scale(C64::new(0.5 * h, 0.0))
            + a2.commutator(&a1).scale(C64::new(SQRT3 * h * h / 12.0, 0.0));
        omega.exp_traceless()
    }

    /// Column `col` (0 or 1) of `mu_side(z; x_i)` at every grid node.
    pub fn column(&self, z: C64, side: Side, col: usize) -> Vec<Vec2> {
        self.sweep(z, side, col, None)
    }

    /// Column `col` of `mu_side(z; x_stop)` only.
    pub fn column_at(&self, z: C64, side: Side, col: usize, stop: usize) -> Vec2 {
        *self.sweep(z, side, col, Some(stop)).last().expect("non-empty sweep")
    }

    fn sweep(&self, z: C64, side: Side, col: usize, stop: Option<usize>) -> Vec<Vec2> {
        let (lambda, k) = uniformize(SpectralPoint::new(z).expect("z checked nonzero"));
        let sign = match side {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        };
        let start = boundary_matrix(z, sign).col(col);
        // mu_1 carries e^{-i lambda x}, mu_2 carries e^{+i lambda x}
        let gauge_sign = if col == 0 { -1.0 } else { 1.0 };
        let h = self.dx;
        let mut out = Vec::with_capacity(match stop {
            Some(_) => 1,
            None => self.n,
        });
        let keep_all = stop.is_none();
        match side {
            Side::Minus => {
                let last = stop.unwrap_or(self.n - 1);
                let g = (I * lambda * (gauge_sign * h)).exp();
                let mut v = start;
                if keep_all {
                    out.push(v);
                }
                for i in 0..last {
                    v = self.cell_propagator(i, k).apply(v).scale(g);
                    if keep_all {
                        out.push(v);
                    }
                }
                if !keep_all {
                    out.push(v);
                }
            }
            Side::Plus => {
                let first = stop.unwrap_or(0);
                let g = (I * lambda * (-gauge_sign * h)).exp();
                let mut v = start;
                if keep_all {
                    out.push(v);
                }
                for i in (first..self.n - 1).rev() {
                    let p = self.cell_propagator(i, k);
                    // inverse of a unit-determinant matrix
                    let m = p.0;
                    let inv = Mat2::new(m[1][1], -m[0][1], -m[1][0], m[0][0]);
                    v = inv.apply(v).scale(g);
                    if keep_all {
                        out.push(v);
                    }
                }
                if keep_all {
                    out.reverse();
                } else {
                    out.push(v);
                }
            }
        }
        out
    }
}

/// Modified Jost matrices sampled on the profile grid.
///
/// Off the real axis only the columns analytic in the half-plane containing
/// `z` are built (`mu_{+,1}`, `mu_{-,2}` in the upper half-plane and
/// `mu_{-,1}`, `mu_{+,2}` in the lower one); the others are `None`.
#[derive(Clone, Debug)]
pub struct JostPair {
    pub z: C64,
    pub x: Vec<f64>,
    pub plus: [Option<Vec<Vec2>>; 2],
    pub minus: [Option<Vec<Vec2>>; 2],
}

impl JostPair {
    /// `mu_+(x_i)` when both columns are available.
    pub fn plus_matrix(&self, i: usize) -> Option<Mat2> {
        match &self.plus {
            [Some(a), Some(b)] => Some(Mat2::from_cols(a[i], b[i])),
            _ => None,
        }
    }

    pub fn minus_matrix(&self, i: usize) -> Option<Mat2> {
        match &self.minus {
            [Some(a), Some(b)] => Some(Mat2::from_cols(a[i], b[i])),
            _ => None,
        }
    }

    /// Largest `|det mu - (1 - z^{-2})|` over the grid, for whichever full
    /// matrices are available.
    pub fn max_det_defect(&self) -> f64 {
        let target = ONE - (self.z * self.z).inv();
        (0..self.x.len())
            .flat_map(|i| [self.plus_matrix(i), self.minus_matrix(i)])
            .flatten()
            .map(|m| (m.det() - target).norm())
            .fold(0.0, f64::max)
    }
}

pub fn jost_solutions(profile: &InitialProfile, z: SpectralPoint) -> Result<JostPair> {
    let op = LaxOperator::new(profile);
    jost_with(&op, z)
}

pub fn jost_with(op: &LaxOperator, z: SpectralPoint) -> Result<JostPair> {
    let z = z.value();
    if z.norm() == 0.0 {
        return Err(Error::ZeroSpectralPoint);
    }
    let x = (0..op.len()).map(|i| op.x_at(i)).collect();
    let upper = z.im >= 0.0;
    let lower = z.im <= 0.0;
    let build = |side, col, ok: bool| ok.then(|| op.column(z, side, col));
    Ok(JostPair {
        z,
        x,
        plus: [build(Side::Plus, 0, upper), build(Side::Plus, 1, lower)],
        minus: [build(Side::Minus, 0, lower), build(Side::Minus, 1, upper)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tanh_profile(n: usize) -> InitialProfile {
        InitialProfile::from_fn(-40.0, 40.0, n, f64::tanh).unwrap()
    }

    #[test]
    fn constant_background_reproduces_boundary_matrix() {
        // q == +1 on the right half, so mu_+ = E_+ there exactly
        let p = InitialProfile::from_fn(-20.0, 20.0, 801, |x| if x < 0.0 { -1.0 } else { 1.0 }).unwrap();
        let z = SpectralPoint::real(1.7).unwrap();
        let j = jost_solutions(&p, z).unwrap();
        let e = boundary_matrix(C64::new(1.7, 0.0), 1.0);
        for i in 500..801 {
            assert!((j.plus_matrix(i).unwrap() - e).max_abs() < 1e-13);
        }
        let em = boundary_matrix(C64::new(1.7, 0.0), -1.0);
        for i in 0..300 {
            assert!((j.minus_matrix(i).unwrap() - em).max_abs() < 1e-13);
        }
    }

    #[test]
    fn determinant_identity() {
        let p = InitialProfile::from_fn(-40.0, 40.0, 2048, |x| x.tanh() + 0.3 * (-x * x).exp()).unwrap();
        for &z in &[0.4, 1.7, -2.3] {
            let j = jost_solutions(&p, SpectralPoint::real(z).unwrap()).unwrap();
            assert!(j.max_det_defect() < 1e-11, "z={z}: {}", j.max_det_defect());
        }
        // z = +-1 goes through the degenerate kernel; det E(+-1) = 0
        let j = jost_solutions(&p, SpectralPoint::real(1.0).unwrap()).unwrap();
        assert!(j.max_det_defect() < 1e-11);
        let upper = jost_solutions(&p, SpectralPoint::new(C64::new(0.3, 1.1)).unwrap()).unwrap();
        assert!(upper.plus[1].is_none() && upper.minus[0].is_none());
    }

    #[test]
    fn continuity_through_one() {
        let p = InitialProfile::from_fn(-30.0, 30.0, 2048, |x| x.tanh() + 0.3 * (-x * x).exp()).unwrap();
        let op = LaxOperator::new(&p);
        let at_one = op.column_at(C64::new(1.0, 0.0), Side::Plus, 0, 1024);
        let near = op.column_at(C64::new(1.0 + 1e-7, 0.0), Side::Plus, 0, 1024);
        assert!(at_one.max_abs_diff(&near) < 1e-5);
    }

    #[test]
    fn tanh_bound_state_is_sech() {
        // at z = i: Phi_{-,2} = (-1, 1) / (2 cosh x)
        let p = tanh_profile(4096);
        let op = LaxOperator::new(&p);
        let mu = op.column(I, Side::Minus, 1);
        for i in (0..2048).step_by(97) {
            let x = op.x_at(i);
            // mu_{-,2} = Phi_{-,2} e^{i lambda x} and i lambda(i) = -1
            let phi = mu[i].scale(C64::new(x.exp(), 0.0));
            let expect = 1.0 / (2.0 * x.cosh());
            assert!((phi.0[0] + expect).norm() < 1e-7 && (phi.0[1] - expect).norm() < 1e-7);
        }
    }

    /// Fourth-order cumulative integral from the right: `out[i] = int_{x_i}^{x_end} f`.
    fn cumulative_from_right(f: &[C64], h: f64) -> Vec<C64> {
        let n = f.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for i in (0..n - 1).rev() {
            let cell = if i == 0 {
                9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]
            } else if i == n - 2 {
                9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4]
            } else {
                -f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]
            };
            out[i] = out[i + 1] + cell * (h / 24.0);
        }
        out
    }

    #[test]
    fn agrees_with_picard_iteration() {
        // mu_{+,1}(x) = E_+ e_1 - int_x^inf E_+ diag(1, e^{-2i lambda (x-y)}) E_+^{-1} dQ(y) mu_{+,1}(y) dy
        // on x >= 0, where the Neumann series is well conditioned
        let z = C64::new(1.5, 0.0);
        let lambda = (z - z.inv()) * 0.5;
        let e = boundary_matrix(z, 1.0);
        let einv = e.inverse().unwrap();
        let n = 8193;
        let h = 40.0 / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let dq: Vec<f64> = xs.iter().map(|x| x.tanh() - 1.0).collect();
        let start = e.col(0);
        let mut mu = vec![start; n];
        for _ in 0..20 {
            let w: Vec<Vec2> = (0..n)
                .map(|i| {
                    // dQ mu = dq * sigma_1 mu
                    let v = Vec2::new(mu[i].0[1], mu[i].0[0]).scale(C64::new(dq[i], 0.0));
                    einv.apply(v)
                })
                .collect();
            let f1: Vec<C64> = w.iter().map(|v| v.0[0]).collect();
            let f2: Vec<C64> = w
                .iter()
                .zip(&xs)
                .map(|(v, &y)| v.0[1] * (2.0 * I * lambda * y).exp())
                .collect();
            let c1 = cumulative_from_right(&f1, h);
            let c2 = cumulative_from_right(&f2, h);
            mu = (0..n)
                .map(|i| {
                    let inner = Vec2::new(c1[i], c2[i] * (-2.0 * I * lambda * xs[i]).exp());
                    start - e.apply(inner)
                })
                .collect();
        }
        let p = InitialProfile::from_fn(-40.0, 40.0, 16385, f64::tanh).unwrap();
        let op = LaxOperator::new(&p);
        let ode = op.column(z, Side::Plus, 0);
        // profile node 8192 + j sits at x = j h
        let err = (0..n / 2)
            .step_by(7)
            .map(|j| ode[8192 + j].max_abs_diff(&mu[j]))
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }
}
