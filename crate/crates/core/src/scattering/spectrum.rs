//! Zeros of `a(z)` on the upper unit semicircle and their norming constants.

use super::jost::Side;
use super::profile::InitialProfile;
use super::Scatterer;
use crate::error::{Error, Result};
use crate::linalg::{C64, I};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One simple zero `eta` of `a` with `|eta| = 1`, `Im eta > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub eta: C64,
    /// `c = 2 eta / int |Phi_{-,2}(eta; x)|^2 dx`.
    pub norming: C64,
    /// `gamma` in `Phi_{+,1}(eta) = gamma Phi_{-,2}(eta)`.
    pub connection: Option<C64>,
    pub a_prime: Option<C64>,
    /// `gamma / a'(eta)`, the alternative route to the norming constant.
    pub norming_from_connection: Option<C64>,
    /// `eta = -conj(eta)`, i.e. `eta = i`. Such a zero is its own mirror
    /// image and is listed once.
    pub self_symmetric: bool,
}

impl Eigenvalue {
    pub fn from_data(eta: C64, norming: C64) -> Self {
        Eigenvalue {
            eta,
            norming,
            connection: None,
            a_prime: None,
            norming_from_connection: None,
            self_symmetric: eta.re.abs() < 1e-8,
        }
    }

    /// `|arg c - arg eta|`, zero when `c = eta |c|`.
    pub fn phase_defect(&self) -> f64 {
        (self.norming / self.eta).arg().abs()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSpectrum {
    pub eigenvalues: Vec<Eigenvalue>,
}

impl DiscreteSpectrum {
    pub fn from_etas(etas: &[C64]) -> Self {
        DiscreteSpectrum {
            eigenvalues: etas.iter().map(|&e| Eigenvalue::from_data(e, e)).collect(),
        }
    }

    pub fn etas(&self) -> Vec<C64> {
        self.eigenvalues.iter().map(|e| e.eta).collect()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanConfig {
    pub samples: usize,
    /// Root acceptance: `|f| <` this after refinement.
    pub residual: f64,
    pub derivative_step: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            samples: 2000,
            residual: 1e-10,
            derivative_step: 1e-6,
        }
    }
}

/// Zeros of `f` on the open upper unit semicircle, found from the local
/// minima of `|f(e^{i alpha})|` and refined by complex secant steps.
pub fn arc_zeros(f: impl Fn(C64) -> C64 + Sync, cfg: &ScanConfig) -> Result<Vec<C64>> {
    let n = cfg.samples.max(8);
    let step = std::f64::consts::PI / n as f64;
    let alpha = |j: usize| (j as f64 + 0.5) * step;
    let mags: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| f(C64::from_polar(1.0, alpha(j))).norm())
        .collect();
    let mut roots: Vec<C64> = Vec::new();
    for j in 1..n - 1 {
        if !(mags[j] <= mags[j - 1] && mags[j] <= mags[j + 1]) {
            continue;
        }
        let z0 = C64::from_polar(1.0, alpha(j) - 0.25 * step);
        let z1 = C64::from_polar(1.0, alpha(j) + 0.25 * step);
        match secant(&f, z0, z1, cfg.residual) {
            Some(z) if (z.norm() - 1.0).abs() < 1e-8 && z.im > 0.0 => {
                if roots.iter().all(|r| (r - z).norm() > 1e-8) {
                    roots.push(z);
                }
            }
            // a genuine near-zero that would not refine
            _ if mags[j] < 1e-2 => {
                return Err(Error::NonConvergence {
                    stage: "discrete_spectrum",
                    detail: format!(
                        "secant refinement failed near alpha = {:.6} (|a| = {:e})",
                        alpha(j),
                        mags[j]
                    ),
                })
            }
            _ => {}
        }
    }
    roots.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    Ok(roots)
}

fn secant(f: &impl Fn(C64) -> C64, mut z0: C64, mut z1: C64, residual: f64) -> Option<C64> {
    let mut f0 = f(z0);
    let mut f1 = f(z1);
    for _ in 0..60 {
        let den = f1 - f0;
        if den.norm() == 0.0 {
            break;
        }
        let z2 = z1 - f1 * (z1 - z0) / den;
        if !z2.re.is_finite() || !z2.im.is_finite() || z2.im <= 0.0 {
            return None;
        }
        z0 = z1;
        f0 = f1;
        z1 = z2;
        f1 = f(z1);
        if (z1 - z0).norm() < 1e-14 {
            break;
        }
    }
    (f1.norm() < residual).then_some(z1)
}

/// Central-difference `f'(eta)` along the tangent `i eta` and the normal
/// `eta` of the unit circle, averaged.
pub fn arc_derivative(f: impl Fn(C64) -> C64, eta: C64, h: f64) -> C64 {
    let t = I * eta;
    let dt = (f(eta + t * h) - f(eta - t * h)) / (t * (2.0 * h));
    let dn = (f(eta + eta * h) - f(eta - eta * h)) / (eta * (2.0 * h));
    (dt + dn) * 0.5
}

pub fn discrete_spectrum(profile: &InitialProfile) -> Result<DiscreteSpectrum> {
    discrete_spectrum_with(&Scatterer::new(profile), &ScanConfig::default())
}

pub fn discrete_spectrum_with(s: &Scatterer, cfg: &ScanConfig) -> Result<DiscreteSpectrum> {
    let a = |z: C64| s.a_upper(z).unwrap_or(C64::new(f64::NAN, f64::NAN));
    let roots = arc_zeros(a, cfg)?;
    let eigenvalues = roots
        .into_iter()
        .map(|eta| norming_data(s, eta, cfg))
        .collect::<Result<_>>()?;
    Ok(DiscreteSpectrum { eigenvalues })
}

fn norming_data(s: &Scatterer, eta: C64, cfg: &ScanConfig) -> Result<Eigenvalue> {
    let a_prime = arc_derivative(|z| s.a_upper(z).unwrap_or(C64::new(f64::NAN, f64::NAN)), eta, cfg.derivative_step);
    if !(a_prime.norm() > 1e-8) {
        return Err(Error::NonConvergence {
            stage: "discrete_spectrum",
            detail: format!("a'(eta) = {a_prime} at eta = {eta}: zero is not simple"),
        });
    }
    let op = s.operator();
    let lambda = (eta - eta.inv()) * 0.5;
    let m = s.matching;
    let minus: Vec<_> = op
        .column(eta, Side::Minus, 1)
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.scale((-I * lambda * op.x_at(i)).exp()))
        .collect();
    let plus: Vec<_> = op
        .column(eta, Side::Plus, 0)
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.scale((I * lambda * op.x_at(i)).exp()))
        .collect();
    // least-squares gamma at the matching node
    let (u, v) = (minus[m], plus[m]);
    let gamma = (v.0[0] * u.0[0].conj() + v.0[1] * u.0[1].conj()) / u.norm_sqr();
    let density: Vec<f64> = (0..op.len())
        .map(|i| {
            if i <= m {
                minus[i].norm_sqr()
            } else {
                plus[i].norm_sqr() / gamma.norm_sqr()
            }
        })
        .collect();
    let integral = crate::quad::trapezoid(&density, op.dx());
    Ok(Eigenvalue {
        eta,
        norming: 2.0 * eta / integral,
        connection: Some(gamma),
        a_prime: Some(a_prime),
        norming_from_connection: Some(gamma / a_prime),
        self_symmetric: eta.re.abs() < 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manufactured_blaschke_zero() {
        let eta = C64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
        let f = |z: C64| (z - eta) / (z - eta.conj());
        let roots = arc_zeros(f, &ScanConfig::default()).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - eta).norm() < 1e-8);
        let d = arc_derivative(f, eta, 1e-6);
        let exact = 1.0 / (eta - eta.conj());
        assert!((d - exact).norm() < 1e-8);
    }

    #[test]
    fn no_zeros_for_unimodular_function() {
        let roots = arc_zeros(|z: C64| z * z + 3.0, &ScanConfig::default()).unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn kink_has_single_zero_at_i() {
        let p = InitialProfile::from_fn(-40.0, 40.0, 4096, f64::tanh).unwrap();
        let eigs = discrete_spectrum(&p).unwrap();
        assert_eq!(eigs.len(), 1);
        let e = eigs.eigenvalues[0];
        assert!((e.eta - I).norm() < 1e-8, "{:?}", e.eta);
        assert!(e.self_symmetric);
        assert!(e.phase_defect() < 1e-6);
        // |c| = 2 by hand: int sech^2 / 2 = 1
        assert!((e.norming.norm() - 2.0).abs() < 1e-6, "{}", e.norming);
        let alt = e.norming_from_connection.unwrap();
        assert!((alt.norm() - e.norming.norm()).abs() < 1e-5);
    }
}
