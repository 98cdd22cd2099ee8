//! Leading-order behaviour in the transition band `|x/t + 6| t^{2/3} < C`:
//! `q ~ -1 + (3t)^{-1/3} u(s) cos phi_0`.

use crate::cauchy::PhaseAtOne;
use crate::error::{Error, Result};
use crate::linalg::{Mat2, C64, I, ONE};
use crate::painleve::PIISolution;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// The exponent `epsilon` in the error term `O(t^{-1/3 - epsilon})`,
/// taken in the middle of the admissible interval `(0, 1/9)`.
pub const EPSILON: f64 = 1.0 / 18.0;

/// Amplitudes `p` and `|r(1)|` must agree to this for the solution and the
/// phase to count as built from the same data.
pub const PROVENANCE_TOL: f64 = 1e-9;

/// `s = (x/t + 6) (3t)^{2/3} / 3`.
pub fn s_of(x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("time must be positive, got {t}")));
    }
    Ok((x / t + 6.0) * (3.0 * t).powf(2.0 / 3.0) / 3.0)
}

/// Inverse of [`s_of`] at fixed `t`.
pub fn x_of(s: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("time must be positive, got {t}")));
    }
    Ok(t * (3.0 * s / (3.0 * t).powf(2.0 / 3.0) - 6.0))
}

/// `|x/t + 6| t^{2/3}`.
pub fn band_coordinate(x: f64, t: f64) -> f64 {
    (x / t + 6.0).abs() * t.powf(2.0 / 3.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionQuery {
    pub x: f64,
    pub t: f64,
}

impl TransitionQuery {
    /// Rejects `t <= 0` and points outside the band `C` when one is given.
    pub fn new(x: f64, t: f64, band: Option<f64>) -> Result<Self> {
        if !(t > 0.0) || !x.is_finite() {
            return Err(Error::invalid(format!("bad query point (x, t) = ({x}, {t})")));
        }
        if let Some(c) = band {
            let b = band_coordinate(x, t);
            if b > c {
                return Err(Error::OutOfRange {
                    what: "band coordinate |x/t+6| t^(2/3)",
                    value: b,
                    min: 0.0,
                    max: c,
                });
            }
        }
        Ok(TransitionQuery { x, t })
    }

    pub fn from_s(s: f64, t: f64) -> Result<Self> {
        Self::new(x_of(s, t)?, t, None)
    }

    pub fn s(&self) -> f64 {
        (self.x / self.t + 6.0) * (3.0 * self.t).powf(2.0 / 3.0) / 3.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticResult {
    pub q_leading: f64,
    pub s: f64,
    /// `(3t)^{-1/3}`.
    pub amplitude: f64,
    /// `t^{-1/3 - epsilon}`, reported only.
    pub error_scale: f64,
    pub u: f64,
}

fn check_provenance(phase: &PhaseAtOne, pii: &PIISolution) -> Result<()> {
    if (phase.p - pii.p).abs() > PROVENANCE_TOL {
        return Err(Error::invalid(format!(
            "Painleve solution built for p = {} but the phase data have p = {}",
            pii.p, phase.p
        )));
    }
    Ok(())
}

pub fn q_transition(q: TransitionQuery, phase: &PhaseAtOne, pii: &PIISolution) -> Result<AsymptoticResult> {
    check_provenance(phase, pii)?;
    let s = q.s();
    let u = pii.u_at(s)?;
    let amplitude = (3.0 * q.t).powf(-1.0 / 3.0);
    Ok(AsymptoticResult {
        q_leading: -1.0 + amplitude * u * phase.phi0.cos(),
        s,
        amplitude,
        error_scale: q.t.powf(-1.0 / 3.0 - EPSILON),
        u,
    })
}

/// `E1` and `M3(0)` of the first-order expansion:
/// `E1 = (3t)^{-1/3} [[i I, i u cos], [-i u cos, -i I]]`,
/// `M3(0) = Id + (3t)^{-1/3} [[0, u sin], [u sin, 0]]`.
pub fn first_order_matrices(s: f64, t: f64, phase: &PhaseAtOne, pii: &PIISolution) -> Result<(Mat2, Mat2)> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("time must be positive, got {t}")));
    }
    check_provenance(phase, pii)?;
    let (u, _, tail) = pii.eval(s)?;
    let tau = (3.0 * t).powf(-1.0 / 3.0);
    let (sin, cos) = phase.phi0.sin_cos();
    let e1 = Mat2::new(I * tail, I * (u * cos), -I * (u * cos), -I * tail).scale(C64::new(tau, 0.0));
    let off = C64::new(tau * u * sin, 0.0);
    let m3 = Mat2::new(ONE, off, off, ONE);
    Ok((e1, m3))
}

/// `i ((sigma2 M3(0)^{-1})_{21} + (E1)_{21})`, which agrees with
/// [`q_transition`] up to `O(t^{-2/3})`.
pub fn reconstruct_q(e1: &Mat2, m3: &Mat2) -> Result<f64> {
    let inv = m3
        .inverse()
        .ok_or_else(|| Error::invalid("M3(0) is singular"))?;
    let v = I * ((crate::linalg::sigma2() * inv).0[1][0] + e1.0[1][0]);
    Ok(v.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub t: f64,
    pub s: f64,
    pub q_asym: f64,
}

/// Evaluates the formula on `n` equally spaced `s` in `[s_lo, s_hi]` for
/// each `t`, rejecting points outside the band `C` when one is given.
pub fn sweep(
    times: &[f64],
    s_window: (f64, f64),
    n: usize,
    band: Option<f64>,
    phase: &PhaseAtOne,
    pii: &PIISolution,
) -> Result<Vec<SweepRow>> {
    if n < 1 || !(s_window.0 <= s_window.1) {
        return Err(Error::invalid("s window must be ordered and hold at least one point"));
    }
    let mut rows = Vec::with_capacity(times.len() * n);
    for &t in times {
        for j in 0..n {
            let s = if n == 1 {
                s_window.0
            } else {
                s_window.0 + (s_window.1 - s_window.0) * j as f64 / (n - 1) as f64
            };
            let x = x_of(s, t)?;
            let q = TransitionQuery::new(x, t, band)?;
            let r = q_transition(q, phase, pii)?;
            rows.push(SweepRow { x, t, s, q_asym: r.q_leading });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("x,t,s,q_asym\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            crate::fmt12(r.x),
            crate::fmt12(r.t),
            crate::fmt12(r.s),
            crate::fmt12(r.q_asym)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::painleve::{airy_ai, solve_pii, PIIConfig};
    use proptest::prelude::*;

    fn setup(p: f64, phi0: f64) -> (PhaseAtOne, PIISolution) {
        let phase = PhaseAtOne { p, phi0, generic: false };
        (phase, solve_pii(&PIIConfig::with_p(p)).unwrap())
    }

    #[test]
    fn s_values() {
        assert_eq!(s_of(-6.0 * 2.5, 2.5).unwrap(), 0.0);
        assert!((s_of(-7.0 / 3.0, 1.0 / 3.0).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        assert!(s_of(1.0, 0.0).is_err());
        let t = 7.0;
        let x = x_of(1.3, t).unwrap();
        assert!((s_of(x, t).unwrap() - 1.3).abs() < 1e-13);
    }

    #[test]
    fn zero_amplitude_is_background() {
        let (phase, pii) = setup(0.0, 0.4);
        for s in [-2.0, 0.0, 3.0] {
            let r = q_transition(TransitionQuery::from_s(s, 10.0).unwrap(), &phase, &pii).unwrap();
            assert_eq!(r.q_leading, -1.0);
        }
        let (e1, m3) = first_order_matrices(0.0, 10.0, &phase, &pii).unwrap();
        assert_eq!(e1, Mat2::zero());
        assert_eq!(m3, Mat2::identity());
    }

    #[test]
    fn eightfold_time_halves_correction() {
        let (phase, pii) = setup(0.6, 0.3);
        let a = q_transition(TransitionQuery::from_s(-1.2, 5.0).unwrap(), &phase, &pii).unwrap();
        let b = q_transition(TransitionQuery::from_s(-1.2, 40.0).unwrap(), &phase, &pii).unwrap();
        assert!(((b.q_leading + 1.0) - 0.5 * (a.q_leading + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn airy_edge_bound() {
        let (phase, pii) = setup(0.8, 0.0);
        let t = 20.0;
        let r = q_transition(TransitionQuery::from_s(6.0, t).unwrap(), &phase, &pii).unwrap();
        let bound = (3.0 * t).powf(-1.0 / 3.0) * 0.8 * airy_ai(6.0).unwrap().ai * (1.0 + 1e-3);
        assert!((r.q_leading + 1.0).abs() <= bound);
        // Airy-rate decay within a factor 2
        let r7 = q_transition(TransitionQuery::from_s(7.0, t).unwrap(), &phase, &pii).unwrap();
        let ratio = (r7.q_leading + 1.0) / (r.q_leading + 1.0);
        let airy = airy_ai(7.0).unwrap().ai / airy_ai(6.0).unwrap().ai;
        assert!(ratio / airy > 0.5 && ratio / airy < 2.0);
    }

    #[test]
    fn provenance_and_range_checks() {
        let (phase, pii) = setup(0.5, 0.0);
        let other = PhaseAtOne { p: 0.4, ..phase };
        let q = TransitionQuery::from_s(0.0, 5.0).unwrap();
        assert!(q_transition(q, &other, &pii).is_err());
        assert!(q_transition(TransitionQuery::from_s(9.5, 5.0).unwrap(), &phase, &pii).is_err());
        assert!(TransitionQuery::new(-50.0, 10.0, Some(1.0)).is_err());
        assert!(TransitionQuery::new(-59.9, 10.0, Some(1.0)).is_ok());
    }

    #[test]
    fn first_order_structure_and_consistency() {
        let (phase, pii) = setup(0.7, 0.9);
        let (e1, m3) = first_order_matrices(0.5, 4.0, &phase, &pii).unwrap();
        assert_eq!(e1.0[0][0], -e1.0[1][1]);
        assert_eq!(m3.0[0][1], m3.0[1][0]);
        let t = 100.0;
        let (e1, m3) = first_order_matrices(0.0, t, &phase, &pii).unwrap();
        let q = q_transition(TransitionQuery::from_s(0.0, t).unwrap(), &phase, &pii).unwrap();
        // second-order expansion: the two differ by tau^2 u^2 sin^2 / (1 - ...)
        let tau = (3.0 * t).powf(-1.0 / 3.0);
        let w = tau * q.u * phase.phi0.sin();
        let rec = reconstruct_q(&e1, &m3).unwrap();
        assert!((rec - q.q_leading - (-w * w / (1.0 - w * w))).abs() < 1e-12);
        assert!((rec - q.q_leading).abs() < 5.0 * tau * tau * (1.0 + q.u * q.u));
    }

    #[test]
    fn sweep_shape() {
        let (phase, pii) = setup(0.5, 0.2);
        let rows = sweep(&[5.0, 10.0], (-2.0, 2.0), 11, Some(20.0), &phase, &pii).unwrap();
        assert_eq!(rows.len(), 22);
        assert!((rows[5].s).abs() < 1e-15);
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("x,t,s,q_asym\n"));
        assert!(sweep(&[5.0], (-2.0, 2.0), 11, Some(0.1), &phase, &pii).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn scaled_correction_is_time_independent(s in -5.0f64..5.0, t in 1.0f64..500.0) {
            let phase = PhaseAtOne { p: 0.5, phi0: 0.4, generic: false };
            let pii = solve_pii(&PIIConfig::with_p(0.5)).unwrap();
            let a = q_transition(TransitionQuery { x: x_of(s, t).unwrap(), t }, &phase, &pii).unwrap();
            let b = q_transition(TransitionQuery { x: x_of(s, 2.0).unwrap(), t: 2.0 }, &phase, &pii).unwrap();
            let sa = (a.q_leading + 1.0) * (3.0 * t).cbrt();
            let sb = (b.q_leading + 1.0) * 6f64.cbrt();
            prop_assert!((sa - sb).abs() < 1e-12);
        }

        #[test]
        fn s_is_increasing_in_x(x in -100.0f64..100.0, dx in 1e-3f64..10.0, t in 0.1f64..50.0) {
            prop_assert!(s_of(x + dx, t).unwrap() > s_of(x, t).unwrap());
        }

        #[test]
        fn leading_term_bound(s in -8.0f64..8.0, t in 1.0f64..100.0, phi0 in -3.0f64..3.0) {
            let phase = PhaseAtOne { p: 0.9, phi0, generic: false };
            let pii = solve_pii(&PIIConfig::with_p(0.9)).unwrap();
            let r = q_transition(TransitionQuery { x: x_of(s, t).unwrap(), t }, &phase, &pii).unwrap();
            let umax = pii.u.iter().fold(0.0f64, |m, u| m.max(u.abs()));
            prop_assert!((r.q_leading + 1.0).abs() <= r.amplitude * umax * (1.0 + 1e-9));
        }
    }
}
