use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn levykb(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levykb"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn validate_cauchy_passes_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = levykb(&["validate", "--spec", "cauchy"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(dir.path());
    assert_eq!(m["command"], "validate");
    assert_eq!(m["verdict"], "PASS");
    assert_eq!(m["config"]["spec"]["kind"], "PowerLaw");
    for f in m["files"].as_array().unwrap() {
        assert!(dir.path().join(f.as_str().unwrap()).is_file());
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("verdict PASS"));
}

#[test]
fn bad_arguments_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["validate", "--spec", "gaussian"][..],
        &["scales", "--t-grid", "1:0.1:3"],
        &["bounds", "--tail-cdf", r#"{"scale": 1}"#],
    ] {
        let o = levykb(args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"), "{args:?}");
    }
    let o = levykb(&["validate", "--spec", "stable:2.5"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn spec_from_a_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    let preset = serde_json::to_string(&levykb_core::LevyMeasureSpec::dyadic(1.0, 1.0)).unwrap();
    std::fs::write(&spec, preset).unwrap();
    let out = dir.path().join("out");
    let o = levykb(&["scales", "--spec", spec.to_str().unwrap(), "--t-grid", "1e-3:1:4"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(manifest(&out)["config"]["spec"]["kind"], "DyadicAtoms");
}

#[test]
fn repeated_runs_give_identical_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["exponents", "--spec", "stable:1.5", "--t-grid", "1e-2:1:3"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    levykb(&args, &a);
    levykb(&args, &b);
    let (mut ma, mut mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma["config_hash"], mb["config_hash"]);
    ma["config"]["out"] = Value::Null;
    mb["config"]["out"] = Value::Null;
    assert_eq!(ma, mb);
    assert_eq!(std::fs::read(a.join("exponents.csv")).unwrap(), std::fs::read(b.join("exponents.csv")).unwrap());
}

#[test]
fn csv_format_skips_the_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = levykb(&["scales", "--t-grid", "1e-2:1:3", "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("scales.csv").is_file());
    assert!(!dir.path().join("scales.json").exists());
    let csv = std::fs::read_to_string(dir.path().join("scales.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn cauchy_density_has_unit_mass() {
    let dir = tempfile::tempdir().unwrap();
    let o = levykb(&["density", "--t-grid", "1e-2:0.1:2", "--x-points", "2001"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("density.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "PASS");
    assert!(dir.path().join("density_k0.csv").is_file());
}

#[test]
fn first_example_reports_the_band() {
    let dir = tempfile::tempdir().unwrap();
    let o = levykb(&["example", "exa1", "--t-grid", "1e-2:0.1:2", "--x-points", "401"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(dir.path().join("exa1_band.csv").is_file());
    assert!(manifest(dir.path())["constants"].as_object().unwrap().keys().any(|k| k.starts_with("on_diag.")));
}
