use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mkdv_core::InitialProfile;
use serde_json::Value;

fn mkdv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mkdv"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run mkdv")
}

fn write_profile(dir: &Path, name: &str, f: fn(f64) -> f64) -> PathBuf {
    let p = InitialProfile::from_fn(-40.0, 40.0, 2048, f).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, p.to_csv()).unwrap();
    path
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().last().expect("stderr line");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn scatter_finds_pole_at_i() {
    let d = tempfile::tempdir().unwrap();
    write_profile(d.path(), "tanh.csv", f64::tanh);
    let o = mkdv(d.path(), &["scatter", "--profile", "tanh.csv", "--out", "o", "--zgrid", "4:3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(d.path().join("o/scattering.json"));
    let poles = v["poles"].as_array().unwrap();
    assert_eq!(poles.len(), 1);
    assert!((poles[0]["im"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let m = read_json(d.path().join("o/scatter.manifest.json"));
    assert_eq!(m["outputs"][0], "scattering.json");
    assert_eq!(m["inputs"][0]["path"], "tanh.csv");
}

#[test]
fn input_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("empty.csv"), "").unwrap();
    let o = mkdv(d.path(), &["scatter", "--profile", "empty.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["kind"], "input");

    std::fs::write(d.path().join("bad.csv"), "x,q\n0,1\n1,oops\n").unwrap();
    let o = mkdv(d.path(), &["scatter", "--profile", "bad.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["line"], 3);

    write_profile(d.path(), "tanh.csv", f64::tanh);
    let o = mkdv(d.path(), &["scatter", "--profile", "tanh.csv", "--zgrid", "0.5,1.0,2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["message"].as_str().unwrap().contains("margin"));

    let o = mkdv(d.path(), &["painleve", "--p", "1.2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn painleve_outputs() {
    let d = tempfile::tempdir().unwrap();
    let o = mkdv(d.path(), &["painleve", "--p", "0", "--out", "zero"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(d.path().join("zero/pii.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("s,u,uprime,I"));
    assert!(lines.all(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() == 0.0));

    let o = mkdv(d.path(), &["painleve", "--p", "0.5", "--out", "half"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(d.path().join("half/pii.csv")).unwrap();
    let row = csv.lines().find(|l| l.starts_with("8.00000000000e0,")).unwrap();
    let u: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    // Ai(8) = 4.6922076161e-8
    assert!((u + 0.5 * 4.692_207_616_1e-8).abs() < 1e-14, "{u}");
    let m = read_json(d.path().join("half/painleve.manifest.json"));
    assert!(m["details"]["residual"]["max"].as_f64().unwrap() < 1e-8);
}

#[test]
fn config_file_and_flag_override() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("run.cfg"), "p = 0.2\nout = a\n").unwrap();
    let o = mkdv(d.path(), &["painleve", "--config", "run.cfg"]);
    assert!(o.status.success());
    let o = mkdv(d.path(), &["painleve", "--config", "run.cfg", "--p", "0.3", "--out", "b"]);
    assert!(o.status.success());
    let a = read_json(d.path().join("a/painleve.manifest.json"));
    let b = read_json(d.path().join("b/painleve.manifest.json"));
    assert_eq!(a["details"]["settings"]["p"], "0.2");
    assert_eq!(b["details"]["settings"]["p"], "0.3");
    assert_ne!(a["config_hash"], b["config_hash"]);

    std::fs::write(d.path().join("bad.cfg"), "colour = red\n").unwrap();
    let o = mkdv(d.path(), &["painleve", "--config", "bad.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn deterministic_reruns() {
    let d = tempfile::tempdir().unwrap();
    for out in ["r1", "r2"] {
        let o = mkdv(d.path(), &["asymptote", "--p", "0.5", "--phi0", "0.3", "--tlist", "5,10", "--ns", "5", "--out", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(d.path().join("r1/asymptote.csv")).unwrap();
    let b = std::fs::read(d.path().join("r2/asymptote.csv")).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().starts_with("x,t,s,q_asym\n"));
}

#[test]
fn compare_reflectionless_kink() {
    let d = tempfile::tempdir().unwrap();
    write_profile(d.path(), "tanh.csv", f64::tanh);
    let o = mkdv(
        d.path(),
        &["compare", "--profile", "tanh.csv", "--reflectionless", "--tlist", "1,2,1", "--ns", "3", "--out", "c"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("duplicate time"));
    let r = read_json(d.path().join("c/report.json"));
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert_eq!(row["q_asym"].as_f64().unwrap(), -1.0);
    }
    let csv = std::fs::read_to_string(d.path().join("c/report.csv")).unwrap();
    assert!(csv.starts_with("x,t,s,q_asym,q_sim,abs_err\n"));
    let m = read_json(d.path().join("c/compare.manifest.json"));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn numerical_failure_exits_3() {
    let d = tempfile::tempdir().unwrap();
    // p = 1 leaves the bounded branch before s = -12
    let o = mkdv(d.path(), &["painleve", "--p", "1", "--smin", "-12", "--out", "x"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let e = stderr_json(&o);
    assert_eq!(e["kind"], "numerical");
    assert_eq!(e["stage"], "painleve");
    assert!(!d.path().join("x").exists());
}

#[test]
fn simulate_snapshots() {
    let d = tempfile::tempdir().unwrap();
    write_profile(d.path(), "tanh.csv", f64::tanh);
    let o = mkdv(d.path(), &["simulate", "--profile", "tanh.csv", "--tlist", "0.5", "--n", "2048", "--out", "s"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("s/snapshot_t0.5.csv")).unwrap();
    assert!(csv.starts_with("x,q\n"));
    let m = read_json(d.path().join("s/simulate.manifest.json"));
    assert!(m["details"]["simulation"]["ledger"].as_array().unwrap().len() >= 2);
}

#[test]
fn signature_table() {
    let d = tempfile::tempdir().unwrap();
    let o = mkdv(d.path(), &["signature", "--xi", "-7", "--res", "4:4", "--out", "g"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(d.path().join("g/signature.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
}
