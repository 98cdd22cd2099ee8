use std::path::Path;

use serde_json::json;

use mkdv_core::cauchy::{PhaseAtOne, PhaseVariant, TableConfig};
use mkdv_core::painleve::{solve_pii, PIIConfig};
use mkdv_core::pipeline::{compare_with_phase, phase_stage, CompareConfig, PhaseStage};
use mkdv_core::scattering::{discrete_spectrum_with, symmetric_grid, ScanConfig, DEFAULT_MARGIN};
use mkdv_core::sim::{evolve, snapshot_csv, SimConfig};
use mkdv_core::spectral::{signature_grid, GridBounds};
use mkdv_core::transition::{sweep, sweep_csv, EPSILON};
use mkdv_core::{InitialProfile, RaySlope, Scatterer};

use crate::manifest::{Outputs, RunManifest};
use crate::settings::Settings;
use crate::CliError;

type Res = Result<(), CliError>;

pub fn dispatch(command: &str, s: &Settings, config: Option<String>) -> Res {
    let mut m = RunManifest::new(command, s);
    if let Some(path) = config {
        let bytes = std::fs::read(&path).unwrap_or_default();
        m.input(&path, &bytes);
    }
    let mut out = Outputs::default();
    match command {
        "scatter" => scatter(s, &mut m, &mut out)?,
        "phase" => phase(s, &mut m, &mut out)?,
        "painleve" => painleve(s, &mut m, &mut out)?,
        "asymptote" => asymptote(s, &mut m, &mut out)?,
        "simulate" => simulate(s, &mut m, &mut out)?,
        "compare" => compare(s, &mut m, &mut out)?,
        "signature" => signature(s, &mut m, &mut out)?,
        other => return Err(CliError::input(format!("unknown command {other}"))),
    }
    let dir = s.get("out").unwrap_or(".");
    for p in out.write(Path::new(dir), m)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn load_profile(s: &Settings, m: &mut RunManifest) -> Result<InitialProfile, CliError> {
    let path = s.get("profile").ok_or_else(|| CliError::input("--profile is required"))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read profile {path}: {e}")))?;
    m.input(path, text.as_bytes());
    Ok(InitialProfile::from_csv(&text)?)
}

fn zgrid(s: &Settings) -> Result<Vec<f64>, CliError> {
    let text = s.get("zgrid").unwrap_or("20:3");
    if let Some((n, zmax)) = text.split_once(':') {
        let n: usize = n.trim().parse().map_err(|_| CliError::input(format!("zgrid: bad count `{n}`")))?;
        let zmax: f64 = zmax.trim().parse().map_err(|_| CliError::input(format!("zgrid: bad zmax `{zmax}`")))?;
        if n == 0 || !(zmax > 1.0) {
            return Err(CliError::input("zgrid: need n >= 1 and zmax > 1"));
        }
        Ok(symmetric_grid(n, zmax))
    } else {
        s.list_or("zgrid", "")
    }
}

fn variant(s: &Settings) -> Result<PhaseVariant, CliError> {
    match s.get("variant").unwrap_or("integral") {
        "integral" => Ok(PhaseVariant::Integral),
        "blaschke" => Ok(PhaseVariant::Blaschke),
        v => Err(CliError::input(format!("variant: expected integral or blaschke, found `{v}`"))),
    }
}

/// Phase from `--reflectionless`, from explicit `p` and `phi0`, or from the profile.
fn phase_source(s: &Settings, m: &mut RunManifest) -> Result<(PhaseStage, Option<InitialProfile>), CliError> {
    if s.flag("reflectionless")? {
        let profile = s.get("profile").map(|_| load_profile(s, m)).transpose()?;
        return Ok((PhaseStage::reflectionless(), profile));
    }
    if let (Some(p), Some(phi0)) = (s.opt_f64("p")?, s.opt_f64("phi0")?) {
        let mut st = PhaseStage::reflectionless();
        st.details.phase = PhaseAtOne { p, phi0, generic: p == 1.0 };
        let profile = s.get("profile").map(|_| load_profile(s, m)).transpose()?;
        return Ok((st, profile));
    }
    let profile = load_profile(s, m)?;
    let st = phase_stage(&profile, &TableConfig::default(), variant(s)?)?;
    Ok((st, Some(profile)))
}

fn scatter(s: &Settings, m: &mut RunManifest, out: &mut Outputs) -> Res {
    let profile = load_profile(s, m)?;
    let grid = zgrid(s)?;
    let margin = s.f64_or("margin", DEFAULT_MARGIN)?;
    let sc = Scatterer::new(&profile);
    let mut data = sc.reflection_grid(&grid, margin).map_err(|e| e.in_stage("scatter"))?;
    data.spectrum = discrete_spectrum_with(&sc, &ScanConfig::default()).map_err(|e| e.in_stage("spectrum"))?;
    let r1 = sc.reflection_at_one().map_err(|e| e.in_stage("scatter"))?;
    let mut v = data.to_json();
    v["r_at_one"] = json!({ "re": r1.r1.re, "im": r1.r1.im, "generic": r1.generic });
    let defect = data.max_unitarity_defect();
    v["max_unitarity_defect"] = json!(defect);
    m.tolerances.insert("margin", margin);
    m.detail("poles", json!(data.spectrum.len()));
    out.add("scattering.json", serde_json::to_string_pretty(&v).expect("json") + "\n");
    Ok(())
}

fn phase(s: &Settings, m: &mut RunManifest, out: &mut Outputs) -> Res {
    let (st, _) = phase_source(s, m)?;
    let v = serde_json::to_value(&st).expect("json");
    m.detail("p", json!(st.phase().p));
    m.detail("phi0", json!(st.phase().phi0));
    out.add("phase.json", serde_json::to_string_pretty(&v).expect("json") + "\n");
    Ok(())
}

fn pii_config(s: &Settings, p: f64, smin_default: f64) -> Result<PIIConfig, CliError> {
    let cfg = PIIConfig { p, s_min: s.f64_or("smin", smin_default)?, ..PIIConfig::default() };
    cfg.validate()?;
    Ok(cfg)
}

fn painleve(s: &Settings, m: &mut RunManifest, out: &mut Outputs) -> Res {
    let cfg = pii_config(s, s.f64_or("p", 0.5)?, PIIConfig::default().s_min)?;
    let sol = solve_pii(&cfg).map_err(|e| e.in_stage("painleve"))?;
    m.tolerances.insert("atol", cfg.atol);
    m.tolerances.insert("rtol", cfg.rtol);
    m.detail(
        "residual",
        json!({
            "max": sol.max_residual_on(cfg.s_min, cfg.s_start),
            "range": [cfg.s_min, cfg.s_start],
            "steps": sol.steps,
            "boundary_case": sol.boundary_case,
        }),
    );
    out.add("pii.csv", sol.to_csv());
    Ok(())
}

fn times(s: &Settings, default: &str) -> Result<Vec<f64>, CliError> {
    let t = s.list_or("tlist", default)?;
    if t.is_empty() {
        return Err(CliError::input("tlist is empty"));
    }
    Ok(t)
}

fn asymptote(s: &Settings, m: &mut RunManifest, out: &mut Outputs) -> Res {
    let (st, _) = phase_source(s, m)?;
    let phase = st.phase();
    let cfg = pii_config(s, phase.p, -4.0)?;
    let sol = solve_pii(&cfg).map_err(|e| e.in_stage("painleve"))?;
    let [lo, hi] = s.tuple_or::<2>("swindow", "-2:2")?;
    let band = s.opt_f64("bandC")?;
    let rows = sweep(&times(s, "5,10,20,40")?, (lo, hi), s.usize_or("ns", 11)?, band, &phase, &sol)
        .map_err(|e| e.in_stage("asymptote"))?;
    m.detail("phase", serde_json::to_value(phase).expect("json"));
    m.detail("epsilon", json!(EPSILON));
    out.add("asymptote.csv", sweep_csv(&rows));
    Ok(())
}

fn sim_config(s: &Settings) -> Result<SimConfig, CliError> {
    let d = SimConfig::default();
    let cfg = SimConfig {
        dt: s.f64_or("dt", d.dt)?,
        n: s.usize_or("n", d.n)?,
        half_width: s.f64_or("halfwidth", d.half_width)?,
        frame_speed: s.f64_or("framespeed", d.frame_speed)?,
        ..d
    };
    Ok(cfg)
}

fn simulate(s: &Settings, m: &mut RunManifest, out: &mut Outputs) -> Res {
    let profile = load_profile(s, m)?;
    let ts = times(s, "1")?;
    let t_final = ts.iter().copied().fold(0.0, f64::max);
    let cfg = SimConfig { t_final, ..sim_config(s)? };
    cfg.validate()?;
    let hist = evolve(&profile, &ts, &cfg).map_err(|e| e.in_stage("simulate"))?;
    m.tolerances.insert("edge_tol", cfg.edge_tol);
    m.detail("simulation", hist.manifest());
    for st in &hist.snapshots {
        out.add(format!("snapshot_t{}.csv", st.t), snapshot_csv(st));
    }
    Ok(())
}

fn compare(s: &Settings, m: &mut RunManifest, out: &mut Outputs) -> Res {
    let (st, profile) = phase_source(s, m)?;
    let profile = match profile {
        Some(p) => p,
        None => load_profile(s, m)?,
    };
    let [lo, hi] = s.tuple_or::<2>("swindow", "-2:2")?;
    let d = CompareConfig::default();
    let cfg = CompareConfig {
        times: times(s, "5,10,20,40")?,
        s_window: (lo, hi),
        n_s: s.usize_or("ns", d.n_s)?,
        band: s.opt_f64("bandC")?,
        variant: variant(s)?,
        pii: pii_config(s, st.phase().p, d.pii.s_min)?,
        sim: sim_config(s)?,
        ..d
    };
    let (report, hist) = compare_with_phase(&profile, &st.phase(), &cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    m.tolerances.insert("edge_tol", cfg.sim.edge_tol);
    m.tolerances.insert("pii_atol", cfg.pii.atol);
    m.detail("phase", serde_json::to_value(&st).expect("json"));
    m.detail("sup_err", serde_json::to_value(&report.sup_err).expect("json"));
    m.detail("slope", json!(report.slope));
    m.detail("simulation", hist.manifest());
    out.add("report.json", serde_json::to_string_pretty(&report).expect("json") + "\n");
    out.add("report.csv", report.to_csv());
    Ok(())
}

fn signature(s: &Settings, m: &mut RunManifest, out: &mut Outputs) -> Res {
    let xi = RaySlope::new(s.f64_or("xi", -6.0)?)?;
    let [u_min, u_max, v_min, v_max] = s.tuple_or::<4>("bounds", "-2:2:-2:2")?;
    let [nu, nv] = s.tuple_or::<2>("res", "100:100")?;
    if nu.fract() != 0.0 || nv.fract() != 0.0 || nu < 0.0 || nv < 0.0 {
        return Err(CliError::input("res: expected two nonnegative integers"));
    }
    let portrait = signature_grid(xi, GridBounds { u_min, u_max, v_min, v_max }, (nu as usize, nv as usize))?;
    m.detail("xi", json!(xi.value()));
    out.add("signature.csv", portrait.to_csv());
    Ok(())
}
