//! Black-box tests of the binary: flag handling, config merging, exit codes,
//! output formats, and byte determinism.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_sschain");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary spawns")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(BIN).args(args).env(key, value).output().expect("binary spawns")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn lines_of(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(str::to_owned).collect()
}

#[test]
fn dispersion_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let status = run(&[
        "dispersion", "--delta", "0.7", "--samples", "2", "--kh-min", "0", "--kh-max", "1",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let lines = lines_of(&out);
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "kh,omega_sq,err_bound");
    assert!(lines[1].starts_with("0,0,"), "kh=0 row must report omega_sq=0: {}", lines[1]);
}

#[test]
fn dispersion_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let args = |p: &Path| {
        vec![
            "dispersion".into(),
            "--delta".into(),
            "0.5".into(),
            "--samples".into(),
            "64".into(),
            "--kh-max".into(),
            "20".into(),
            "--out".into(),
            p.to_str().unwrap().to_string(),
        ]
    };
    assert!(Command::new(BIN).args(args(&a)).status().unwrap().success());
    assert!(Command::new(BIN).args(args(&b)).status().unwrap().success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let one = run_env(
        &["dispersion", "--delta", "0.7", "--samples", "97", "--kh-max", "15", "--out",
          a.to_str().unwrap()],
        "SSCHAIN_THREADS",
        "1",
    );
    let many = run_env(
        &["dispersion", "--delta", "0.7", "--samples", "97", "--kh-max", "15", "--out",
          b.to_str().unwrap()],
        "SSCHAIN_THREADS",
        "5",
    );
    assert!(one.status.success() && many.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn inadmissible_delta_exits_2_and_cites_interval() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let result = run(&["dispersion", "--delta", "2.5", "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    let msg = stderr_of(&result);
    assert!(msg.contains("(0,2)"), "message must cite the admissible interval: {msg}");
    assert!(!out.exists(), "no output file may exist after a validation failure");
}

#[test]
fn log_spacing_from_zero_exits_2() {
    let result = run(&["dispersion", "--delta", "0.5", "--kh-min", "0", "--spacing", "log"]);
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr_of(&result).contains("log spacing"));
}

#[test]
fn exhausted_series_budget_exits_3() {
    // N this close to 1 needs far more than the 2M-term cap.
    let result = run(&[
        "dispersion", "--N", "1.0000001", "--delta", "0.5", "--kh-min", "1", "--kh-max", "2",
        "--samples", "2",
    ]);
    assert_eq!(result.status.code(), Some(3));
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cfg.csv");
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"delta": 0.5, "samples": 16, "kh-max": 5.0, "out": "{}"}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let result = run(&["dispersion", "--config", cfg.to_str().unwrap(), "--samples", "8"]);
    assert!(result.status.success(), "{}", stderr_of(&result));
    let lines = lines_of(&out);
    assert_eq!(lines.len(), 1 + 8, "flag --samples 8 must override config samples 16");
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"delta": 0.5, "khmax": 3}"#).unwrap();
    let result = run(&["dispersion", "--config", cfg.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr_of(&result).contains("khmax"));
}

#[test]
fn missing_delta_exits_2() {
    let result = run(&["dispersion"]);
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr_of(&result).contains("--delta"));
}

#[test]
fn density_zero_row_and_epsilon_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rho.csv");
    let ok = run(&[
        "density", "--delta", "0.5", "--omega-min", "0", "--omega-max", "1", "--samples", "3",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(ok.status.success());
    let lines = lines_of(&out);
    assert_eq!(lines[0], "omega,rho");
    assert_eq!(lines[1], "0,0");

    let capped = run(&["density", "--delta", "0.5", "--epsilon", "0.5"]);
    assert_eq!(capped.status.code(), Some(2));
    let boundary = run(&["density", "--delta", "2"]);
    assert_eq!(boundary.status.code(), Some(2));
}

#[test]
fn fractal_selftest_reports_dimension_one() {
    let result = run(&["fractal-dim", "--selftest"]);
    assert!(result.status.success());
    let report = json_of(&result);
    let dim = report["dimension"].as_f64().unwrap();
    assert!((dim - 1.0).abs() <= 0.05, "selftest dimension {dim}");
    assert_eq!(report["predicted"].as_f64().unwrap(), 1.0);
    assert!(report["r2"].as_f64().unwrap() > 0.99);
}

#[test]
fn fractal_dim_writes_json_file_with_expected_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dim.json");
    let result = run(&[
        "fractal-dim", "--delta", "0.5", "--samples", "16384", "--scales", "9", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr_of(&result));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for key in ["dimension", "r2", "predicted", "scales", "counts"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["predicted"].as_f64().unwrap(), 1.5);
    let dim = report["dimension"].as_f64().unwrap();
    assert!((dim - 1.5).abs() <= 0.2, "coarse 2^14-sample dimension {dim}");
}

#[test]
fn simulate_zero_packet_stays_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sim");
    let result = run(&[
        "simulate", "--delta", "0.7", "--M", "32", "--steps", "60", "--snap-every", "30",
        "--packet-amplitude", "0", "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr_of(&result));
    for idx in 0..=2 {
        let lines = lines_of(&out_dir.join(format!("snapshot_{idx:06}.csv")));
        assert_eq!(lines[0], "x,u,v");
        for line in &lines[1..] {
            let mut it = line.split(',');
            it.next();
            assert_eq!(it.next(), Some("0"), "u must be zero: {line}");
            assert_eq!(it.next(), Some("0"), "v must be zero: {line}");
        }
    }
    let log: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("energy.json")).unwrap())
            .unwrap();
    for entry in log["entries"].as_array().unwrap() {
        assert_eq!(entry["drift_rel"].as_f64().unwrap(), 0.0);
        assert_eq!(entry["total"].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn simulate_exact_logs_tiny_drift() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sim");
    let result = run(&[
        "simulate", "--delta", "0.7", "--M", "128", "--L", "40", "--steps", "400",
        "--snap-every", "100", "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", stderr_of(&result));
    let log: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("energy.json")).unwrap())
            .unwrap();
    assert_eq!(log["integrator"], "exact");
    let entries = log["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 5);
    for entry in entries {
        assert!(entry["drift_rel"].as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn simulate_verlet_unstable_dt_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let result = run(&[
        "simulate", "--delta", "0.7", "--M", "32", "--L", "16", "--dt", "5", "--integrator",
        "verlet", "--out-dir", dir.path().join("v").to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(4));
    assert!(stderr_of(&result).contains("unstable"));
}

#[test]
fn continuum_gaussian_report_is_consistent() {
    let result = run(&["continuum", "--delta", "0.7", "--epsilon", "1e-3", "--x", "0"]);
    assert!(result.status.success(), "{}", stderr_of(&result));
    let report = json_of(&result);
    let rel = report["rel_diff"].as_f64().unwrap();
    assert!(rel <= 0.01, "series/continuum relative difference {rel}");
    let c = report["C"].as_f64().unwrap();
    let coeff = report["longwave_coeff"].as_f64().unwrap();
    assert!((coeff - c / 1e-3).abs() <= 1e-9 * coeff.abs());
}

#[test]
fn continuum_constant_field_reports_zeros_and_pi() {
    let result = run(&["continuum", "--delta", "1", "--field", "constant"]);
    assert!(result.status.success());
    let report = json_of(&result);
    assert_eq!(report["series_value"].as_f64().unwrap(), 0.0);
    assert_eq!(report["continuum_value"].as_f64().unwrap(), 0.0);
    assert_eq!(report["rel_diff"].as_f64().unwrap(), 0.0);
    let c = report["C"].as_f64().unwrap();
    assert!((c - std::f64::consts::PI).abs() <= 1e-6 * std::f64::consts::PI);
}

#[test]
fn json_keys_are_lexicographic() {
    let result = run(&["continuum", "--delta", "0.5", "--field", "constant"]);
    assert!(result.status.success());
    let text = String::from_utf8_lossy(&result.stdout).into_owned();
    let keys: Vec<usize> = ["\"C\"", "\"continuum_value\"", "\"longwave_coeff\"", "\"rel_diff\"",
        "\"series_value\""]
        .iter()
        .map(|k| text.find(k).unwrap_or_else(|| panic!("missing key {k}")))
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]), "keys out of order in {text}");
}
