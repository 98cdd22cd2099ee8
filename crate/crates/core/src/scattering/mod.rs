//! Forward scattering transform for the kink background.
//!
//! Scattering coefficients come from Wronskians of the modified Jost columns
//! at a matching node `x_m`:
//!
//! ```text
//! a(z) = det(mu_{+,1}, mu_{-,2}) / (1 - z^-2)
//! b(z) = e^{2 i lambda x_m} det(mu_{-,1}, mu_{+,1}) / (1 - z^-2)
//! ```
//!
//! `r = b / a` is formed from the two determinants directly, so the common
//! factor `1 - z^-2` never appears and `r` stays well conditioned next to
//! `z = +-1`.

pub mod jost;
pub mod profile;
pub mod spectrum;

use crate::error::{Error, Result};
use crate::linalg::{wronskian, C64, I, ONE};
use crate::spectral::{uniformize, SpectralPoint};
use jost::{LaxOperator, Side};
use profile::InitialProfile;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
pub use spectrum::{discrete_spectrum, discrete_spectrum_with, DiscreteSpectrum, Eigenvalue, ScanConfig};

/// Default exclusion radius around `0` and `+-1` for real sample grids.
pub const DEFAULT_MARGIN: f64 = 1e-3;

/// `|r(1)| > 1 - GENERIC_TOL` marks the generic case.
pub const GENERIC_TOL: f64 = 1e-4;

/// One real-axis sample of the scattering matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSample {
    pub z: f64,
    pub a: C64,
    pub b: C64,
    pub r: C64,
}

impl ScatteringSample {
    pub fn unitarity_defect(&self) -> f64 {
        (self.a.norm_sqr() - self.b.norm_sqr() - 1.0).abs()
    }
}

/// A profile prepared for repeated scattering evaluations.
#[derive(Clone, Debug)]
pub struct Scatterer {
    op: LaxOperator,
    matching: usize,
    mass: f64,
}

impl Scatterer {
    /// Matching at the node closest to `x = 0`.
    pub fn new(profile: &InitialProfile) -> Self {
        let i0 = ((0.0 - profile.x_min()) / profile.dx()).round();
        let matching = (i0.max(1.0) as usize).min(profile.len() - 2);
        Self::with_matching(profile, matching)
    }

    pub fn with_matching(profile: &InitialProfile, matching: usize) -> Self {
        Scatterer {
            op: LaxOperator::new(profile),
            matching: matching.min(profile.len() - 1),
            mass: profile.mass(),
        }
    }

    pub fn operator(&self) -> &LaxOperator {
        &self.op
    }

    pub fn matching_x(&self) -> f64 {
        self.op.x_at(self.matching)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `(det(mu_{+,1}, mu_{-,2}), e^{2 i lambda x_m} det(mu_{-,1}, mu_{+,1}))`.
    fn wronskians(&self, z: C64) -> (C64, C64) {
        let m = self.matching;
        let p1 = self.op.column_at(z, Side::Plus, 0, m);
        let m1 = self.op.column_at(z, Side::Minus, 0, m);
        let m2 = self.op.column_at(z, Side::Minus, 1, m);
        let lambda = (z - z.inv()) * 0.5;
        let phase = (2.0 * I * lambda * self.matching_x()).exp();
        (wronskian(p1, m2), phase * wronskian(m1, p1))
    }

    pub fn sample(&self, z: f64) -> Result<ScatteringSample> {
        check_real(z, 0.0)?;
        let zc = C64::new(z, 0.0);
        let (wa, wb) = self.wronskians(zc);
        let d = ONE - (zc * zc).inv();
        Ok(ScatteringSample {
            z,
            a: wa / d,
            b: wb / d,
            r: wb / wa,
        })
    }

    /// `r(z)` on the real axis. Also valid at `z = +-1` through the
    /// degenerate kernel, though callers should prefer
    /// [`Scatterer::reflection_at_one`].
    pub fn reflection(&self, z: f64) -> C64 {
        let (wa, wb) = self.wronskians(C64::new(z, 0.0));
        wb / wa
    }

    /// `a(z)` for `Im z >= 0`.
    pub fn a_upper(&self, z: C64) -> Result<C64> {
        let sp = SpectralPoint::new(z)?;
        if z.im < 0.0 {
            return Err(Error::invalid("a(z) is only continued into the upper half-plane"));
        }
        let m = self.matching;
        let p1 = self.op.column_at(z, Side::Plus, 0, m);
        let m2 = self.op.column_at(z, Side::Minus, 1, m);
        let d = ONE - (sp.value() * sp.value()).inv();
        if d.norm() < 1e-14 {
            return Err(Error::MarginViolation {
                value: z.re,
                excluded: z.re.signum(),
                margin: 0.0,
            });
        }
        Ok(wronskian(p1, m2) / d)
    }

    pub fn reflection_grid(&self, grid: &[f64], margin: f64) -> Result<ScatteringData> {
        for &z in grid {
            check_real(z, margin)?;
        }
        let samples: Vec<ScatteringSample> = grid
            .par_iter()
            .map(|&z| self.sample(z))
            .collect::<Result<_>>()?;
        Ok(ScatteringData {
            grid: grid.to_vec(),
            r: samples.iter().map(|s| s.r).collect(),
            a: Some(samples.iter().map(|s| s.a).collect()),
            b: Some(samples.iter().map(|s| s.b).collect()),
            spectrum: DiscreteSpectrum::default(),
            mass: self.mass,
            time: 0.0,
        })
    }

    pub fn reflection_at_one(&self) -> Result<ReflectionAtOne> {
        extrapolate_at_one(|z| self.reflection(z))
    }
}

fn check_real(z: f64, margin: f64) -> Result<()> {
    if !z.is_finite() {
        return Err(Error::invalid("spectral grid contains a non-finite value"));
    }
    for excluded in [0.0, 1.0, -1.0] {
        let d = (z - excluded).abs();
        if d == 0.0 || d < margin {
            if excluded == 0.0 && d == 0.0 {
                return Err(Error::ZeroSpectralPoint);
            }
            return Err(Error::MarginViolation {
                value: z,
                excluded,
                margin,
            });
        }
    }
    Ok(())
}

/// `r(1)` obtained by extrapolation, never by evaluation at `z = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionAtOne {
    pub r1: C64,
    pub generic: bool,
    /// Symmetric averages `(r(1+h) + r(1-h)) / 2` used by the extrapolation.
    pub sequence: Vec<(f64, C64)>,
    /// Size of the last Richardson correction.
    pub correction: f64,
}

/// Richardson extrapolation in `h^2` of `(f(1+h) + f(1-h)) / 2` with
/// `h = 1e-2 * 2^-j`.
pub fn extrapolate_at_one(f: impl Fn(f64) -> C64) -> Result<ReflectionAtOne> {
    const LEVELS: usize = 5;
    let sequence: Vec<(f64, C64)> = (0..LEVELS)
        .map(|j| {
            let h = 1e-2 * 0.5f64.powi(j as i32);
            (h, (f(1.0 + h) + f(1.0 - h)) * 0.5)
        })
        .collect();
    if sequence.iter().any(|(_, v)| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonConvergence {
            stage: "reflection_at_one",
            detail: format!("non-finite samples {sequence:?}"),
        });
    }
    let mut table: Vec<C64> = sequence.iter().map(|s| s.1).collect();
    let mut correction = 0.0;
    for level in 1..LEVELS {
        let factor = 4f64.powi(level as i32);
        let next: Vec<C64> = table
            .windows(2)
            .map(|w| (w[1] * factor - w[0]) / (factor - 1.0))
            .collect();
        correction = (next[next.len() - 1] - table[table.len() - 1]).norm();
        table = next;
    }
    let r1 = table[0];
    let scale = 1.0 + r1.norm();
    let spread = (sequence[LEVELS - 1].1 - sequence[LEVELS - 2].1).norm();
    if correction > 1e-6 * scale && correction > spread {
        return Err(Error::NonConvergence {
            stage: "reflection_at_one",
            detail: format!("Richardson correction {correction:e}; samples {sequence:?}"),
        });
    }
    Ok(ReflectionAtOne {
        r1,
        generic: r1.norm() > 1.0 - GENERIC_TOL,
        sequence,
        correction,
    })
}

/// Reflection table, discrete spectrum and mass at time `time`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringData {
    pub grid: Vec<f64>,
    pub r: Vec<C64>,
    /// `a` and `b` on the grid when they were computed directly.
    pub a: Option<Vec<C64>>,
    pub b: Option<Vec<C64>>,
    pub spectrum: DiscreteSpectrum,
    pub mass: f64,
    pub time: f64,
}

impl ScatteringData {
    /// A reflectionless table on `grid`.
    pub fn reflectionless(grid: &[f64], spectrum: DiscreteSpectrum) -> Self {
        ScatteringData {
            grid: grid.to_vec(),
            r: vec![C64::new(0.0, 0.0); grid.len()],
            a: None,
            b: None,
            spectrum,
            mass: 0.0,
            time: 0.0,
        }
    }

    pub fn max_unitarity_defect(&self) -> Option<f64> {
        let (a, b) = (self.a.as_ref()?, self.b.as_ref()?);
        Some(
            a.iter()
                .zip(b)
                .map(|(a, b)| (a.norm_sqr() - b.norm_sqr() - 1.0).abs())
                .fold(0.0, f64::max),
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        let poles: Vec<_> = self
            .spectrum
            .eigenvalues
            .iter()
            .map(|e| {
                json!({
                    "re": e.eta.re,
                    "im": e.eta.im,
                    "c_re": e.norming.re,
                    "c_im": e.norming.im,
                })
            })
            .collect();
        json!({
            "grid": self.grid,
            "r_re": self.r.iter().map(|r| r.re).collect::<Vec<_>>(),
            "r_im": self.r.iter().map(|r| r.im).collect::<Vec<_>>(),
            "poles": poles,
            "mass": self.mass,
            "time": self.time,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let floats = |key: &str| -> Result<Vec<f64>> {
            v.get(key)
                .and_then(|a| a.as_array())
                .ok_or_else(|| Error::invalid(format!("scattering JSON lacks array `{key}`")))?
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| Error::invalid(format!("non-numeric entry in `{key}`"))))
                .collect()
        };
        let grid = floats("grid")?;
        let re = floats("r_re")?;
        let im = floats("r_im")?;
        if re.len() != grid.len() || im.len() != grid.len() {
            return Err(Error::invalid("grid, r_re and r_im lengths differ"));
        }
        let num = |p: &serde_json::Value, key: &str| -> Result<f64> {
            p.get(key)
                .and_then(|x| x.as_f64())
                .ok_or_else(|| Error::invalid(format!("pole entry lacks `{key}`")))
        };
        let mut eigenvalues = Vec::new();
        for p in v.get("poles").and_then(|p| p.as_array()).into_iter().flatten() {
            let eta = C64::new(num(p, "re")?, num(p, "im")?);
            eigenvalues.push(Eigenvalue::from_data(eta, C64::new(num(p, "c_re")?, num(p, "c_im")?)));
        }
        Ok(ScatteringData {
            grid,
            r: re.into_iter().zip(im).map(|(a, b)| C64::new(a, b)).collect(),
            a: None,
            b: None,
            spectrum: DiscreteSpectrum { eigenvalues },
            mass: v.get("mass").and_then(|m| m.as_f64()).unwrap_or(f64::NAN),
            time: v.get("time").and_then(|m| m.as_f64()).unwrap_or(0.0),
        })
    }
}

/// `2 i lambda(z) (4 k(z)^2 + 2)`, the exponent rate of `r(z, t)`.
pub fn evolution_rate(z: C64) -> C64 {
    let (lambda, k) = uniformize(SpectralPoint::new(z).expect("nonzero z"));
    2.0 * I * lambda * (4.0 * k * k + 2.0)
}

/// Advances the data from `data.time` to `t`.
pub fn evolve_scattering(data: &ScatteringData, t: f64) -> Result<ScatteringData> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid("evolution time must be finite and nonnegative"));
    }
    let dt = t - data.time;
    let mut out = data.clone();
    for (z, r) in data.grid.iter().zip(out.r.iter_mut()) {
        *r *= (evolution_rate(C64::new(*z, 0.0)) * dt).exp();
    }
    if let Some(b) = out.b.as_mut() {
        for (z, b) in data.grid.iter().zip(b.iter_mut()) {
            *b *= (evolution_rate(C64::new(*z, 0.0)) * dt).exp();
        }
    }
    for e in &mut out.spectrum.eigenvalues {
        let f = (evolution_rate(e.eta) * dt).exp();
        e.norming *= f;
        e.connection = e.connection.map(|g| g * f);
    }
    out.time = t;
    Ok(out)
}

/// Deviations of the reflection symmetries
/// `r(z) = conj r(-z)`, `r(z) = -conj r(1/z)` and `r(z) = -r(-1/z)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub conj_neg: f64,
    pub conj_inv: f64,
    pub neg_inv: f64,
    pub tolerance: f64,
    /// Grid indices involved in a relation violated beyond `tolerance`.
    pub flagged: Vec<usize>,
}

impl SymmetryReport {
    pub fn max_deviation(&self) -> f64 {
        self.conj_neg.max(self.conj_inv).max(self.neg_inv)
    }

    pub fn passed(&self) -> bool {
        self.flagged.is_empty()
    }
}

pub fn validate_symmetries(data: &ScatteringData, tolerance: f64) -> Result<SymmetryReport> {
    let find = |target: f64| -> Result<usize> {
        data.grid
            .iter()
            .position(|&z| (z - target).abs() <= 1e-10 * (1.0 + target.abs()))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "grid is not closed under z -> -z and z -> 1/z (missing {target})"
                ))
            })
    };
    let mut rep = SymmetryReport {
        conj_neg: 0.0,
        conj_inv: 0.0,
        neg_inv: 0.0,
        tolerance,
        flagged: Vec::new(),
    };
    for (i, (&z, &r)) in data.grid.iter().zip(&data.r).enumerate() {
        let n = find(-z)?;
        let v = find(1.0 / z)?;
        let w = find(-1.0 / z)?;
        let d1 = (r - data.r[n].conj()).norm();
        let d2 = (r + data.r[v].conj()).norm();
        let d3 = (r + data.r[w]).norm();
        rep.conj_neg = rep.conj_neg.max(d1);
        rep.conj_inv = rep.conj_inv.max(d2);
        rep.neg_inv = rep.neg_inv.max(d3);
        if d1.max(d2).max(d3) > tolerance {
            rep.flagged.push(i);
        }
    }
    Ok(rep)
}

/// Convenience wrapper over [`Scatterer::sample`].
pub fn scattering_ab(profile: &InitialProfile, z: f64) -> Result<(C64, C64)> {
    let s = Scatterer::new(profile).sample(z)?;
    Ok((s.a, s.b))
}

pub fn reflection_grid(profile: &InitialProfile, grid: &[f64], margin: f64) -> Result<ScatteringData> {
    Scatterer::new(profile).reflection_grid(grid, margin)
}

pub fn reflection_at_one(profile: &InitialProfile) -> Result<ReflectionAtOne> {
    Scatterer::new(profile).reflection_at_one()
}

/// A grid closed under `z -> -z` and `z -> 1/z`: `n` points in `(1, zmax]`,
/// their reciprocals and all negatives, sorted.
pub fn symmetric_grid(n: usize, zmax: f64) -> Vec<f64> {
    let mut g = Vec::with_capacity(4 * n);
    for j in 1..=n {
        let z = 1.0 + (zmax - 1.0) * j as f64 / n as f64;
        g.extend([z, 1.0 / z, -z, -1.0 / z]);
    }
    g.sort_by(|a, b| a.total_cmp(b));
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perturbed(n: usize) -> InitialProfile {
        InitialProfile::from_fn(-40.0, 40.0, n, |x| x.tanh() + 0.3 * (-x * x).exp()).unwrap()
    }

    #[test]
    fn unitarity_and_conjugation() {
        let s = Scatterer::new(&perturbed(2048));
        for &z in &[0.3, 0.8, 1.3, 1.7, 2.9, -1.3] {
            let smp = s.sample(z).unwrap();
            assert!(smp.unitarity_defect() < 1e-9, "z={z}: {}", smp.unitarity_defect());
            assert!(smp.r.norm() < 1.0);
        }
        let p = s.sample(1.3).unwrap();
        let m = s.sample(-1.3).unwrap();
        assert!((p.a - m.a.conj()).norm() < 1e-10);
        assert!((p.b - m.b.conj()).norm() < 1e-10);
    }

    #[test]
    fn rejects_excluded_points() {
        let s = Scatterer::new(&perturbed(512));
        assert!(matches!(s.sample(0.0), Err(Error::ZeroSpectralPoint)));
        assert!(matches!(s.sample(1.0), Err(Error::MarginViolation { .. })));
        assert!(matches!(
            s.reflection_grid(&[0.5, 1.0005], DEFAULT_MARGIN),
            Err(Error::MarginViolation { .. })
        ));
    }

    #[test]
    fn matching_point_independence() {
        let p = perturbed(2048);
        let a = Scatterer::with_matching(&p, 900).sample(1.7).unwrap();
        let b = Scatterer::with_matching(&p, 1200).sample(1.7).unwrap();
        assert!((a.a - b.a).norm() < 1e-8 && (a.b - b.b).norm() < 1e-8);
    }

    #[test]
    fn large_z_and_mass() {
        let p = InitialProfile::from_fn(-40.0, 40.0, 8192, f64::tanh).unwrap();
        let s = Scatterer::new(&p);
        let z = C64::new(0.0, 20.0);
        let a = s.a_upper(z).unwrap();
        assert!((a - (ONE - 2.0 * I / z)).norm() < 0.01);
        // (a - 1) z = i m + O(1/z); one Richardson step removes the O(1/z) term
        let lim = |y: f64| {
            let z = C64::new(0.0, y);
            (s.a_upper(z).unwrap() - 1.0) * z
        };
        let extrapolated = lim(100.0) * 2.0 - lim(50.0);
        let expect = I * s.mass();
        assert!((extrapolated - expect).norm() < 0.01 * expect.norm(), "{extrapolated} vs {expect}");
    }

    #[test]
    fn kink_is_reflectionless() {
        let p = InitialProfile::from_fn(-40.0, 40.0, 4096, f64::tanh).unwrap();
        let s = Scatterer::new(&p);
        for &z in &[0.4, 1.6, -2.2] {
            assert!(s.reflection(z).norm() < 1e-6);
        }
        // a(z) = (z - i)/(z + i)
        let z = C64::new(0.7, 0.9);
        assert!((s.a_upper(z).unwrap() - (z - I) / (z + I)).norm() < 1e-8);
    }

    #[test]
    fn small_and_large_z_trend() {
        let s = Scatterer::new(&perturbed(4096));
        assert!(s.reflection(0.01).norm() < 1e-3);
        let r4 = s.reflection(4.0).norm();
        let r8 = s.reflection(8.0).norm();
        // r ~ z^-2
        assert!(r8 < 0.4 * r4, "{r4} {r8}");
    }

    #[test]
    fn evolution_phase() {
        let grid = vec![2.0];
        let mut d = ScatteringData::reflectionless(&grid, DiscreteSpectrum::default());
        d.r[0] = C64::new(0.5, 0.0);
        assert_eq!(evolve_scattering(&d, 0.0).unwrap().r, d.r);
        let e = evolve_scattering(&d, 1.0).unwrap();
        assert!((e.r[0].norm() - 0.5).abs() < 1e-15);
        let expect = C64::from_polar(0.5, 12.375);
        assert!((e.r[0] - expect).norm() < 1e-12);
    }

    #[test]
    fn symmetry_validation() {
        let grid = symmetric_grid(5, 3.0);
        let zero = ScatteringData::reflectionless(&grid, DiscreteSpectrum::default());
        let rep = validate_symmetries(&zero, 1e-6).unwrap();
        assert_eq!(rep.max_deviation(), 0.0);
        let s = Scatterer::new(&perturbed(4096));
        let mut data = s.reflection_grid(&grid, DEFAULT_MARGIN).unwrap();
        let rep = validate_symmetries(&data, 1e-6).unwrap();
        assert!(rep.passed(), "{rep:?}");
        data.r[3] += C64::new(1e-3, 0.0);
        let rep = validate_symmetries(&data, 1e-6).unwrap();
        assert!(rep.flagged.contains(&3));
        assert!(validate_symmetries(
            &ScatteringData::reflectionless(&[0.5, 2.0], DiscreteSpectrum::default()),
            1e-6
        )
        .is_err());
    }

    #[test]
    fn reflection_at_one_limits() {
        let zero = extrapolate_at_one(|_| C64::new(0.0, 0.0)).unwrap();
        assert_eq!(zero.r1, C64::new(0.0, 0.0));
        assert!(!zero.generic);
        let s = Scatterer::new(&perturbed(4096));
        let one = s.reflection_at_one().unwrap();
        assert!(one.generic, "{one:?}");
        assert!((one.r1.norm() - s.reflection(1.0 - 1e-3).norm()).abs() < 1e-3);
    }

    #[test]
    fn json_roundtrip() {
        let grid = symmetric_grid(2, 2.0);
        let mut d = ScatteringData::reflectionless(&grid, DiscreteSpectrum::default());
        d.r[1] = C64::new(0.25, -0.5);
        d.mass = -2.0;
        let back = ScatteringData::from_json(&d.to_json()).unwrap();
        assert_eq!(back.r, d.r);
        assert_eq!(back.mass, -2.0);
    }
}
