use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ginibre(args: &[&str], root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ginibre")).args(args).env("GINIBRE_OUT", root).output().expect("binary runs")
}

fn json_file(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn error_record(out: &Output) -> Value {
    let line = String::from_utf8_lossy(&out.stderr).lines().last().unwrap_or_default().to_string();
    serde_json::from_str(&line).unwrap()
}

#[test]
fn lone_pair_reaches_its_fixed_point() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("pair");
    let out = ginibre(&["gas", "--n", "2", "--alpha", "0", "--tolerance", "1e-12", "--out", dir.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let final_state = json_file(dir.join("final.json"));
    let z = &final_state["uppers"][0];
    assert!(z[0].as_f64().unwrap().abs() < 1e-10);
    // the stationary height balances y against the mirror and confinement forces
    let summary = json_file(dir.join("summary.json"));
    assert!(summary["run"]["rms_gradient"].as_f64().unwrap() <= 1e-12);
    let manifest = json_file(dir.join("manifest.json"));
    assert_eq!(manifest["command"], "gas");
    assert!(manifest["outputs"].as_array().unwrap().iter().any(|o| o == "final.json"));
}

#[test]
fn usage_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["gas", "--n", "10", "--alpha", "1.5"],
        vec!["mcmc", "--n", "4", "--k", "3"],
        vec!["gas", "--n", "10", "--alpha", "0.5", "--mode", "stochastic", "--sigma", "2"],
        vec!["no-such-command"],
    ] {
        let out = ginibre(&args, tmp.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_record(&out)["error"], "usage");
    }
}

#[test]
fn numerical_failures_exit_with_code_three() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("stalled");
    let out = ginibre(
        &["gas", "--n", "20", "--alpha", "0.5", "--tolerance", "1e-14", "--steps", "5", "--out", dir.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_record(&out)["error"], "numerical");
    assert!(dir.join("manifest.json").exists());
    assert_eq!(json_file(dir.join("error.json"))["exit_code"], 3);
}

#[test]
fn supercritical_noise_runs_when_flagged() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ginibre(
        &["gas", "--n", "10", "--alpha", "0.4", "--mode", "stochastic", "--sigma", "1.6", "--steps", "100", "--experimental"],
        tmp.path(),
    );
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
    assert!(tmp.path().join("gas-n10-a0.4-seed0/manifest.json").exists());
}

#[test]
fn mcmc_output_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let dir = tmp.path().join(name);
        let out = ginibre(
            &["mcmc", "--n", "4", "--k", "2", "--steps", "20000", "--burn-in", "2000", "--seed", "5", "--out", dir.to_str().unwrap()],
            tmp.path(),
        );
        assert!(out.status.success());
        (std::fs::read(dir.join("samples.jsonl")).unwrap(), std::fs::read(dir.join("trace.csv")).unwrap())
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    assert!(!a.0.is_empty());
    let summary = json_file(tmp.path().join("a/summary.json"));
    assert_eq!(summary["on_axis_mass"], 0.5);
}

#[test]
fn oracle_and_ystar_summaries() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ginibre(&["oracle", "--n", "2", "--trials", "20000", "--k", "2", "--target", "100"], tmp.path());
    assert!(out.status.success());
    let dir = tmp.path().join("oracle-n2-seed0");
    let pmf = std::fs::read_to_string(dir.join("pmf.csv")).unwrap();
    assert!(pmf.starts_with("k,count,probability,stderr"));
    let summary = json_file(dir.join("summary.json"));
    let p = summary["pmf"]["2"]["p"].as_f64().unwrap();
    assert!((p - 0.5f64.sqrt()).abs() < 0.02);
    assert!(summary["pmf"].get("1").is_none());
    assert!(std::fs::read_to_string(dir.join("spectra.jsonl")).unwrap().lines().count() >= 100);

    let out = ginibre(&["ystar"], tmp.path());
    assert!(out.status.success());
    let y: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((y["ystar"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn rate_scan_and_analysis_of_a_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ginibre(&["rate", "--alpha", "0,1", "--n", "40"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("rate-n40-seed0/rate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let gas = tmp.path().join("gas");
    let out = ginibre(
        &["gas", "--n", "60", "--alpha", "0.5", "--mode", "stochastic", "--steps", "500", "--out", gas.to_str().unwrap()],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = ginibre(&["analyze", "--input", gas.join("trajectory.jsonl").to_str().unwrap(), "--tail", "0.5"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json_file(tmp.path().join("analyze-trajectory/summary.json"));
    assert_eq!(summary["k"], 30);
    assert!((summary["histogram"]["mass"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!(summary["axis_gap"].as_f64().unwrap() > 0.0);
    let support = std::fs::read_to_string(tmp.path().join("analyze-trajectory/support.csv")).unwrap();
    assert!(support.starts_with("re,im"));
}
