//! End-to-end chain: scattering data, `phi_0` and `p`, Painleve II, the
//! transition formula, and a comparison against the PDE solver.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cauchy::{phi0_and_amp, PhaseAtOne, PhaseDetails, PhaseVariant, ReflectionTable, TableConfig};
use crate::painleve::{solve_pii, PIIConfig, PIISolution};
use crate::scattering::{discrete_spectrum_with, DiscreteSpectrum, ReflectionAtOne, ScanConfig, Scatterer};
use crate::sim::{evolve, SimConfig, SimHistory};
use crate::transition::{sweep, SweepRow};
use crate::{Error, InitialProfile, Result};

/// Spectral inputs to the formula, from a profile or injected directly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseStage {
    pub r1: Option<ReflectionAtOne>,
    pub spectrum: DiscreteSpectrum,
    pub details: PhaseDetails,
}

impl PhaseStage {
    /// `r = 0`, no eigenvalues: `p = 0` and `q_asym = -1`.
    pub fn reflectionless() -> Self {
        PhaseStage {
            r1: None,
            spectrum: DiscreteSpectrum::default(),
            details: PhaseDetails {
                phase: PhaseAtOne { p: 0.0, phi0: 0.0, generic: false },
                variant: PhaseVariant::default(),
                pv_integral: 0.0,
                blaschke_phase: 0.0,
                history: Vec::new(),
                clamped: false,
            },
        }
    }

    pub fn phase(&self) -> PhaseAtOne {
        self.details.phase
    }
}

pub fn phase_stage(profile: &InitialProfile, table: &TableConfig, variant: PhaseVariant) -> Result<PhaseStage> {
    let s = Scatterer::new(profile);
    let r1 = s.reflection_at_one().map_err(|e| e.in_stage("scatter"))?;
    let spectrum = discrete_spectrum_with(&s, &ScanConfig::default()).map_err(|e| e.in_stage("spectrum"))?;
    let tab = ReflectionTable::from_scatterer(&s, table, r1.generic).map_err(|e| e.in_stage("table"))?;
    let details = phi0_and_amp(&tab, &r1, &spectrum, variant).map_err(|e| e.in_stage("phase"))?;
    Ok(PhaseStage { r1: Some(r1), spectrum, details })
}

/// Solves PII with `p` taken from the phase stage.
pub fn painleve_stage(phase: &PhaseAtOne, base: &PIIConfig) -> Result<PIISolution> {
    solve_pii(&PIIConfig { p: phase.p, ..*base }).map_err(|e| e.in_stage("painleve"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareConfig {
    pub times: Vec<f64>,
    pub s_window: (f64, f64),
    pub n_s: usize,
    pub band: Option<f64>,
    pub variant: PhaseVariant,
    pub table: TableConfig,
    pub pii: PIIConfig,
    pub sim: SimConfig,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            times: vec![5.0, 10.0, 20.0, 40.0],
            s_window: (-2.0, 2.0),
            n_s: 11,
            band: None,
            variant: PhaseVariant::default(),
            table: TableConfig::default(),
            pii: PIIConfig { s_min: -4.0, ..PIIConfig::default() },
            sim: SimConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub x: f64,
    pub t: f64,
    pub s: f64,
    pub q_asym: f64,
    pub q_sim: f64,
    pub abs_err: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupError {
    pub t: f64,
    pub sup_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub phase: PhaseAtOne,
    pub rows: Vec<ComparisonRow>,
    pub sup_err: Vec<SupError>,
    /// Least-squares slope of `log sup_err` against `log t`; needs two times.
    pub slope: Option<f64>,
    pub max_mass_drift: f64,
    pub warnings: Vec<String>,
}

impl ComparisonReport {
    pub fn sup_err_at(&self, t: f64) -> Option<f64> {
        self.sup_err.iter().find(|e| (e.t - t).abs() < 1e-9).map(|e| e.sup_err)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,t,s,q_asym,q_sim,abs_err\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                crate::fmt12(r.x),
                crate::fmt12(r.t),
                crate::fmt12(r.s),
                crate::fmt12(r.q_asym),
                crate::fmt12(r.q_sim),
                crate::fmt12(r.abs_err)
            );
        }
        out
    }
}

/// Sorted, deduplicated times plus one warning per dropped duplicate.
pub fn dedup_times(times: &[f64]) -> Result<(Vec<f64>, Vec<String>)> {
    if times.is_empty() {
        return Err(Error::invalid("time list is empty"));
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::invalid(format!("times must be positive, got {t}")));
    }
    let mut ts = times.to_vec();
    ts.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(ts.len());
    let mut warnings = Vec::new();
    for t in ts {
        match out.last() {
            Some(&last) if (t - last).abs() <= 1e-12 * t.max(1.0) => {
                warnings.push(format!("duplicate time {t} dropped"));
            }
            _ => out.push(t),
        }
    }
    Ok((out, warnings))
}

/// Least-squares slope of `log y` on `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Formula values on the `(s, t)` sweep against one solver run that
/// records a snapshot at every requested time.
pub fn compare_with_phase(
    profile: &InitialProfile,
    phase: &PhaseAtOne,
    cfg: &CompareConfig,
) -> Result<(ComparisonReport, SimHistory)> {
    let (times, warnings) = dedup_times(&cfg.times)?;
    let pii = painleve_stage(phase, &cfg.pii)?;
    let asym = sweep(&times, cfg.s_window, cfg.n_s, cfg.band, phase, &pii).map_err(|e| e.in_stage("asymptote"))?;
    let t_final = *times.last().expect("nonempty");
    let sim_cfg = SimConfig { t_final, ..cfg.sim };
    let history = evolve(profile, &times, &sim_cfg).map_err(|e| e.in_stage("simulate"))?;
    let rows = merge(&asym, &history)?;
    let sup_err: Vec<SupError> = times
        .iter()
        .map(|&t| SupError {
            t,
            sup_err: rows
                .iter()
                .filter(|r| r.t == t)
                .map(|r| r.abs_err)
                .fold(0.0, f64::max),
        })
        .collect();
    let slope = loglog_slope(&sup_err.iter().map(|e| (e.t, e.sup_err)).collect::<Vec<_>>());
    let report = ComparisonReport {
        phase: *phase,
        rows,
        sup_err,
        slope,
        max_mass_drift: history.max_mass_drift(),
        warnings,
    };
    Ok((report, history))
}

pub fn compare(profile: &InitialProfile, cfg: &CompareConfig) -> Result<(ComparisonReport, PhaseStage, SimHistory)> {
    let stage = phase_stage(profile, &cfg.table, cfg.variant)?;
    let (report, history) = compare_with_phase(profile, &stage.phase(), cfg)?;
    Ok((report, stage, history))
}

fn merge(asym: &[SweepRow], history: &SimHistory) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::with_capacity(asym.len());
    for a in asym {
        let snap = history.at(a.t).ok_or_else(|| {
            Error::invalid(format!("no snapshot at t = {}", a.t)).in_stage("compare")
        })?;
        let q_sim = snap.q_at(a.x).map_err(|e| e.in_stage("compare"))?;
        rows.push(ComparisonRow {
            x: a.x,
            t: a.t,
            s: a.s,
            q_asym: a.q_asym,
            q_sim,
            abs_err: (q_sim - a.q_asym).abs(),
        });
    }
    rows.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.s.total_cmp(&b.s)));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_warns() {
        let (t, w) = dedup_times(&[10.0, 5.0, 10.0]).unwrap();
        assert_eq!(t, vec![5.0, 10.0]);
        assert_eq!(w.len(), 1);
        assert!(dedup_times(&[]).is_err());
        assert!(dedup_times(&[0.0]).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [5.0, 10.0, 20.0, 40.0].iter().map(|&t: &f64| (t, 3.0 * t.powf(-0.4))).collect();
        assert!((loglog_slope(&pts).unwrap() + 0.4).abs() < 1e-12);
        assert_eq!(loglog_slope(&pts[..1]), None);
    }

    #[test]
    fn reflectionless_kink_matches_constant() {
        // pure kink: the formula gives -1 and the solver carries tanh(x + 2t)
        let profile = InitialProfile::from_fn(-40.0, 40.0, 4096, f64::tanh).unwrap();
        let cfg = CompareConfig {
            times: vec![1.0, 2.0, 2.0],
            n_s: 5,
            ..CompareConfig::default()
        };
        let (rep, _) = compare_with_phase(&profile, &PhaseStage::reflectionless().phase(), &cfg).unwrap();
        assert_eq!(rep.warnings.len(), 1);
        assert_eq!(rep.rows.len(), 10);
        for r in &rep.rows {
            assert_eq!(r.q_asym, -1.0);
            let exact = (r.x + 2.0 * r.t).tanh();
            assert!((r.q_sim - exact).abs() < 1e-5, "{r:?}");
        }
        assert!(rep.rows.windows(2).all(|w| (w[0].t, w[0].s) <= (w[1].t, w[1].s)));
        assert!(rep.sup_err.iter().all(|e| e.sup_err >= 0.0));
    }

    #[test]
    fn stage_name_survives() {
        let profile = InitialProfile::from_fn(-40.0, 40.0, 1024, f64::tanh).unwrap();
        let cfg = CompareConfig {
            times: vec![1.0],
            sim: SimConfig { dt: 1.0, ..SimConfig::default() },
            ..CompareConfig::default()
        };
        let err = compare_with_phase(&profile, &PhaseStage::reflectionless().phase(), &cfg).unwrap_err();
        assert_eq!(err.stage(), Some("simulate"));
    }
}
