//! Spectral-plane geometry: uniformization, the phase function, its saddle
//! points, the sign table of `Re(2i theta)` and the asymptotic-region map.
//!
//! With `lambda(z) = (z - 1/z)/2` and `k(z) = (z + 1/z)/2` the phase is
//! `theta(z) = lambda(z) (xi + 4 k(z)^2 + 2)`, `xi = x/t`. Its derivative
//! factors as `(1 + z^2)(3 z^4 + xi z^2 + 3) / (2 z^4)`, so besides the fixed
//! saddles `+-i` there are four saddles with `z^2 = eta_+-`,
//! `eta_+- = (-xi +- sqrt(xi^2 - 36)) / 6`. They lie on the real axis for
//! `xi < -6`, on the unit circle for `|xi| < 6` and on the imaginary axis for
//! `xi > 6`, merging pairwise at `+-1` (resp. `+-i`) when `xi = -6` (`xi = 6`).

use crate::error::{Error, Result};
use crate::linalg::{C64, I};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// A nonzero point of the uniformized spectral plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint(C64);

impl SpectralPoint {
    pub fn new(z: C64) -> Result<Self> {
        if z.re == 0.0 && z.im == 0.0 {
            return Err(Error::ZeroSpectralPoint);
        }
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::invalid("spectral point must be finite"));
        }
        Ok(SpectralPoint(z))
    }

    pub fn real(z: f64) -> Result<Self> {
        Self::new(C64::new(z, 0.0))
    }

    pub fn value(self) -> C64 {
        self.0
    }
}

/// The ray slope `xi = x / t`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct RaySlope(f64);

impl RaySlope {
    pub fn new(xi: f64) -> Result<Self> {
        if !xi.is_finite() {
            return Err(Error::invalid("ray slope must be finite"));
        }
        Ok(RaySlope(xi))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `(lambda, k)` with `lambda^2 = k^2 - 1`.
pub fn uniformize(z: SpectralPoint) -> (C64, C64) {
    let z = z.0;
    let zi = z.inv();
    ((z - zi) * 0.5, (z + zi) * 0.5)
}

pub fn theta(z: SpectralPoint, xi: RaySlope) -> C64 {
    let (lambda, k) = uniformize(z);
    lambda * (xi.0 + 4.0 * k * k + 2.0)
}

/// Closed form of `d theta / dz`.
pub fn theta_prime(z: SpectralPoint, xi: RaySlope) -> C64 {
    let z = z.0;
    let z2 = z * z;
    (1.0 + z2) * (3.0 * z2 * z2 + xi.0 * z2 + 3.0) / (2.0 * z2 * z2)
}

/// `Re(2 i theta(u + iv))` in closed real form.
pub fn re_2i_theta(u: f64, v: f64, xi: RaySlope) -> Result<f64> {
    if u == 0.0 && v == 0.0 {
        return Err(Error::ZeroSpectralPoint);
    }
    let r2 = u * u + v * v;
    Ok(-v * ((3.0 * u * u - v * v) * (1.0 + r2.powi(-3)) + (xi.0 + 3.0) * (1.0 + 1.0 / r2)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SaddleRegime {
    RealAxis,
    UnitCircle,
    ImaginaryAxis,
}

/// The four `xi`-dependent saddles, ordered as `z_1 .. z_4`, plus the fixed
/// saddles `+-i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleSet {
    pub xi: f64,
    pub points: [C64; 4],
    pub fixed: [C64; 2],
    pub regime: SaddleRegime,
    /// Set at `xi = +-6`, where the saddles coincide pairwise.
    pub merged: bool,
}

impl SaddleSet {
    /// `(eta_+, eta_-)` for `|xi| >= 6` (real) or `|xi| < 6` (unimodular).
    pub fn eta(xi: f64) -> (C64, C64) {
        let disc = xi * xi - 36.0;
        if disc >= 0.0 {
            let s = disc.sqrt();
            (
                C64::new((-xi + s) / 6.0, 0.0),
                C64::new((-xi - s) / 6.0, 0.0),
            )
        } else {
            let s = (-disc).sqrt();
            (C64::new(-xi / 6.0, s / 6.0), C64::new(-xi / 6.0, -s / 6.0))
        }
    }
}

pub fn saddle_points(xi: RaySlope) -> SaddleSet {
    let x = xi.0;
    let (ep, em) = SaddleSet::eta(x);
    let (points, regime) = if x <= -6.0 {
        let (a, b) = (ep.re.sqrt(), em.re.sqrt());
        (
            [C64::new(a, 0.0), C64::new(b, 0.0), C64::new(-b, 0.0), C64::new(-a, 0.0)],
            SaddleRegime::RealAxis,
        )
    } else if x >= 6.0 {
        let (a, b) = ((-em.re).sqrt(), (-ep.re).sqrt());
        (
            [I * a, I * b, -I * b, -I * a],
            SaddleRegime::ImaginaryAxis,
        )
    } else {
        let p = C64::from_polar(1.0, ep.arg() / 2.0);
        let m = C64::from_polar(1.0, em.arg() / 2.0);
        ([p, -p, m, -m], SaddleRegime::UnitCircle)
    };
    SaddleSet {
        xi: x,
        points,
        fixed: [I, -I],
        regime,
        merged: x == -6.0 || x == 6.0,
    }
}

/// Which long-time regime an `(x, t)` point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    SolitonlessLeft,
    Transition,
    Solitonic,
    SolitonlessRight,
}

/// Shape of the transition window around `xi = -6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TransitionWindow {
    /// `|xi + 6| t^{2/3} < C`.
    #[default]
    TwoSided,
    /// `-C < (xi + 6) t^{2/3} < 0`.
    OneSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionClass {
    pub region: Region,
    pub band_c: f64,
    pub window: TransitionWindow,
}

pub fn classify_region(x: f64, t: f64, band_c: f64) -> Result<RegionClass> {
    classify_region_with(x, t, band_c, TransitionWindow::TwoSided)
}

pub fn classify_region_with(
    x: f64,
    t: f64,
    band_c: f64,
    window: TransitionWindow,
) -> Result<RegionClass> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("time must be positive, got {t}")));
    }
    if !(band_c > 0.0) {
        return Err(Error::invalid(format!("band half-width must be positive, got {band_c}")));
    }
    let xi = x / t;
    let scaled = (xi + 6.0) * t.powf(2.0 / 3.0);
    let in_band = match window {
        TransitionWindow::TwoSided => scaled.abs() < band_c,
        TransitionWindow::OneSided => -band_c < scaled && scaled < 0.0,
    };
    let region = if in_band {
        Region::Transition
    } else if xi > -6.0 && xi <= -2.0 {
        Region::Solitonic
    } else if xi < -6.0 {
        Region::SolitonlessLeft
    } else {
        Region::SolitonlessRight
    };
    Ok(RegionClass {
        region,
        band_c,
        window,
    })
}

/// Rectangle `[u_min, u_max] x [v_min, v_max]` in the z-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridBounds {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

/// Sign field of `Re(2i theta)` on a rectangular grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePortrait {
    pub xi: f64,
    /// Row-major points `(u, v)`; `v` is the slow index.
    pub points: Vec<(f64, f64)>,
    pub signs: Vec<i8>,
    pub nu: usize,
    pub nv: usize,
}

/// Threshold below which `Re(2i theta)` is stored as an exact zero.
pub fn zero_threshold(xi: f64) -> f64 {
    1e-14 * (1.0 + xi.abs())
}

pub fn sign_at(u: f64, v: f64, xi: RaySlope) -> Result<i8> {
    let val = re_2i_theta(u, v, xi)?;
    Ok(if val.abs() < zero_threshold(xi.0) {
        0
    } else if val > 0.0 {
        1
    } else {
        -1
    })
}

pub fn signature_grid(xi: RaySlope, bounds: GridBounds, resolution: (usize, usize)) -> Result<PhasePortrait> {
    let (nu, nv) = resolution;
    if nu < 2 || nv < 2 {
        return Err(Error::invalid("signature grid needs at least 2 points per axis"));
    }
    if !(bounds.u_max > bounds.u_min) || !(bounds.v_max > bounds.v_min) {
        return Err(Error::invalid("signature grid bounds must be increasing"));
    }
    let du = (bounds.u_max - bounds.u_min) / (nu - 1) as f64;
    let dv = (bounds.v_max - bounds.v_min) / (nv - 1) as f64;
    let points: Vec<(f64, f64)> = (0..nv)
        .flat_map(|j| (0..nu).map(move |i| (i, j)))
        .map(|(i, j)| (bounds.u_min + i as f64 * du, bounds.v_min + j as f64 * dv))
        .collect();
    if points.iter().any(|&(u, v)| u == 0.0 && v == 0.0) {
        return Err(Error::invalid("signature grid contains the origin"));
    }
    let signs = points
        .par_iter()
        .map(|&(u, v)| sign_at(u, v, xi))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhasePortrait {
        xi: xi.0,
        points,
        signs,
        nu,
        nv,
    })
}

/// Sign field at arbitrary points, for irregular sampling.
pub fn signature_points(xi: RaySlope, points: &[(f64, f64)]) -> Result<PhasePortrait> {
    let signs = points
        .iter()
        .map(|&(u, v)| sign_at(u, v, xi))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhasePortrait {
        xi: xi.0,
        points: points.to_vec(),
        signs,
        nu: points.len(),
        nv: 1,
    })
}

impl PhasePortrait {
    /// CSV with header `u,v,sign`, row-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v,sign\n");
        for (&(u, v), s) in self.points.iter().zip(&self.signs) {
            let _ = writeln!(out, "{},{},{}", crate::fmt12(u), crate::fmt12(v), s);
        }
        out
    }
}
