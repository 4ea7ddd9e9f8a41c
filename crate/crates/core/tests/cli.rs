use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_homopolymer"))
}

fn report(args: &[&str]) -> Value {
    let out = bin().args(args).output().expect("runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("JSON artifact");
    assert_eq!(v["manifest"]["schema_version"], 1);
    v["report"].clone()
}

#[test]
fn lambda_supercritical_one_dimensional() {
    let r = report(&["lambda", "--d", "1", "--beta", "0.75"]);
    assert!((r["lambda"].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn psi_one_dimensional() {
    let r = report(&["psi", "--d", "1", "--beta", "-1", "--x", "3"]);
    assert_eq!(r["psi"].as_f64().unwrap(), 4.0);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = bin().args(["psi", "--d", "1", "--frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_field_is_a_usage_error() {
    let out = bin().args(["lambda", "--d", "4", "--beta", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`d`"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "d = 1\nbeta = -1.0\nx = [7]\n").unwrap();
    let r = report(&["psi", "--config", path.to_str().unwrap(), "--x", "2"]);
    assert_eq!(r["psi"].as_f64().unwrap(), 3.0);
    std::fs::write(&path, "d = 1\nbeta_typo = -1.0\n").unwrap();
    let out = bin().args(["psi", "--config", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta_typo"));
}

#[test]
fn numerical_failure_exits_one() {
    // the polymer sampler refuses β > 0
    let out = bin().args(["sample-polymer", "--d", "1", "--beta", "0.5", "--t", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn kernel_csv_has_manifest_and_header() {
    let out = bin().args(["kernel", "--d", "1", "--beta", "-1", "--t", "2", "--radius", "10"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let manifest = homopolymer::config::Manifest::from_csv_line(lines.next().unwrap()).unwrap();
    manifest.check_schema().unwrap();
    assert_eq!(lines.next().unwrap(), "y1,value");
    let total: f64 = lines.map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!(total > 0.0 && total < 1.0);
}

#[test]
fn artifacts_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let p = dir.path().join(name);
        let st = bin()
            .args(["sample-polymer", "--d", "1", "--beta", "-1", "--t", "20", "--n-paths", "500", "--seed", "3"])
            .args(["--threads", threads, "--output", p.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(st.success());
        let v: Value = serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap();
        v["report"].clone()
    };
    let a = run("1", "a.json");
    let b = run("1", "b.json");
    let c = run("3", "c.json");
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn accept_subset_runs() {
    let out = bin().args(["accept", "--criteria", "1,2"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.lines().filter(|l| l.contains("PASS")).count(), 2);
}

#[test]
fn wetting_reflected_kernel_is_markov() {
    let out = bin().args(["wetting", "--beta-prime", "0.5", "--t", "5"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let total: f64 = text.lines().skip(2).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}
