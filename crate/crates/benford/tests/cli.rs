use std::path::Path;
use std::process::{Command, Output};

fn benford(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_benford")).arg("--out").arg(dir).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let pass = write_config(dir.path(), "pass.json", r#"{"system": {"kind": "map", "map": {"family": "contraction_fixed_point", "a": 0.1}, "x0": 0.05}, "n": 10000}"#);
    let fail = write_config(dir.path(), "fail.json", r#"{"system": {"kind": "map", "map": {"family": "contraction_fixed_point", "a": 0.9}, "x0": 0.05}, "n": 10000}"#);
    let broken = write_config(dir.path(), "broken.json", r#"{"system": {"kind": "map", "map": {"family": "affine_plus", "a": 0.5, "g": "zero"}, "x0": 1}, "n": 100}"#);
    assert_eq!(benford(dir.path(), &["run", "--config", &pass]).status.code(), Some(0));
    assert_eq!(benford(dir.path(), &["run", "--config", &fail]).status.code(), Some(2));
    let out = benford(dir.path(), &["run", "--config", &broken]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("system.a"));
    let missing = dir.path().join("nope.json");
    assert_eq!(benford(dir.path(), &["run", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cfg.json",
        r#"{"system": {"kind": "iid_product", "dist": {"family": "uniform", "lo": 0.0, "hi": 1.0}}, "n": 5000, "seed": 5}"#,
    );
    let read = |d: &Path| (std::fs::read(d.join("report.json")).unwrap(), std::fs::read(d.join("orbit.csv")).unwrap());
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(benford(a.path(), &["run", "--config", &cfg]).status.success());
    assert!(benford(b.path(), &["run", "--config", &cfg]).status.success());
    assert_eq!(read(a.path()), read(b.path()));
    let (_, orbit) = read(a.path());
    assert!(String::from_utf8(orbit).unwrap().starts_with("n,sign,log_mag,first_digit\n1,1,"));
    // a different seed changes the orbit
    let c = tempfile::tempdir().unwrap();
    assert!(benford(c.path(), &["--seed", "6", "run", "--config", &cfg]).status.success());
    assert_ne!(read(a.path()).1, read(c.path()).1);
}

#[test]
fn csv_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfg.json", r#"{"system": {"kind": "exact", "sequence": {"name": "factorial"}}, "n": 10000}"#);
    assert!(benford(dir.path(), &["--format", "csv", "run", "--config", &cfg]).status.success());
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report.contains("percent_d1,29.56\n"));
    assert!(report.contains("percent_d9,4.26\n"));
}

#[test]
fn reproduce_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = benford(dir.path(), &["--format", "csv", "reproduce", "fig1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("F_n,30.11,17.62,12.50,9.68,7.92,6.68,5.80,5.13,4.56\n"));
    assert!(text.contains("exact BL,30.10,17.60,12.49,9.69,7.91,6.69,5.79,5.11,4.57\n"));
    assert!(benford(dir.path(), &["reproduce", "fig1a"]).status.success());
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("fig1a.json")).unwrap()).unwrap();
    assert_eq!(json[4]["label"], "counts N=10000");
    assert_eq!(json[4]["values"][0], "3011");
}

#[test]
fn reproduce_boundary_curve() {
    let dir = tempfile::tempdir().unwrap();
    assert!(benford(dir.path(), &["reproduce", "fig2-boundary"]).status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("fig2_boundary.csv")).unwrap();
    let rows: Vec<(f64, f64, f64, f64)> = rdr.deserialize().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 360);
    let diag = rows.iter().find(|r| r.0 == 45.0).unwrap();
    assert!((diag.1 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
}

#[test]
fn twostep_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let out = benford(dir.path(), &["twostep", "basin", "--a2", "4", "--ray", "2,1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let s5 = 5f64.sqrt();
    assert!((v["cycle"][0].as_f64().unwrap() - (5.0 + s5) / 30.0).abs() < 1e-8);
    assert!((v["cycle"][1].as_f64().unwrap() - (5.0 - s5) / 30.0).abs() < 1e-8);
    let out = benford(dir.path(), &["twostep", "shadow", "--b1", "6/5", "--x1", "5", "--x2", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = benford(dir.path(), &["twostep", "shadow", "--b2", "4", "--x1", "5", "--x2", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = benford(dir.path(), &["--seed", "3", "twostep", "fraction", "--region", "1.5,3,1.5,3", "--samples", "3", "-N", "2000"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["samples"].as_array().unwrap().len(), 3);
    let out = benford(dir.path(), &["twostep", "orbit", "--x1", "0.5", "--x2", "0.5", "-N", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    let out = benford(dir.path(), &["twostep", "basin", "--ray", "1,0"]);
    assert_eq!(out.status.code(), Some(1));
}
