use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn digitfrac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_digitfrac")).args(args).output().unwrap()
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.display().to_string()
}

#[test]
fn dim_on_four_corner_set() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"set": {"base": 4, "coords": [[0, 3], [0, 3]]}, "t": [0, 1]}"#);
    let out = digitfrac(&["dim", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let r = &records(&out)[0];
    assert!((r["dim"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert_eq!(r["argmin"], serde_json::json!([2]));

    let out = digitfrac(&["dim", "--config", &cfg, "--euclidean"]);
    assert_eq!(records(&out)[0]["dim"].as_f64(), Some(2.0));
}

#[test]
fn dim_with_zero_weights_is_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"t": [0, 0]}"#);
    let r = &records(&digitfrac(&["dim", "--config", &cfg]))[0];
    assert!((r["dim"].as_f64().unwrap() - 2.0 * 2f64.ln() / 3f64.ln()).abs() < 1e-12);
}

#[test]
fn mtp_on_explicit_instance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"mtp": {"instance": {"delta": [0.5, 0.5], "a": [1, 1], "t": [0, 1], "kappa": 0}}}"#,
    );
    let out = digitfrac(&["mtp", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let r = &records(&out)[0];
    assert!((r["s_t"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert_eq!(r["argmin"], serde_json::json!([2.0]));
}

#[test]
fn series_on_default_function() {
    let r = &records(&digitfrac(&["series"]))[0];
    assert_eq!(r["(ii)"], "divergent");
    assert_eq!(r["(iii)"], "proved");
}

#[test]
fn cover_scan_changes_slope_sign_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("cover.jsonl");
    let out = digitfrac(&["cover", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    let scans: Vec<&Value> = recs.iter().filter(|r| r["command"] == "cover").collect();
    let slope = |offset: f64| {
        scans
            .iter()
            .find(|r| (r["offset"].as_f64().unwrap() - offset).abs() < 1e-12)
            .unwrap()["tail_slope"]
            .as_f64()
            .unwrap()
    };
    assert!(slope(-0.05) > 0.0 && slope(0.05) < 0.0);
    for r in &scans {
        let csv = std::fs::read_to_string(r["csv"].as_str().unwrap()).unwrap();
        assert_eq!(csv.lines().next(), Some("n,log_term"));
        assert_eq!(csv.lines().count(), 62);
    }
    let jsonl = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(jsonl.as_bytes(), out.stdout.as_slice());
}

#[test]
fn boxcount_writes_both_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"psi": {"family": "power", "c": 1}, "boxcount": {"levels": [1, 2, 3, 4], "generations": [2, 3]}}"#,
    );
    let out_path = dir.path().join("bc");
    let out = digitfrac(&["boxcount", "--config", &cfg, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let counts = std::fs::read_to_string(dir.path().join("bc.counts.csv")).unwrap();
    assert_eq!(counts, "m,count\n1,4\n2,16\n3,64\n4,256\n");
    let exps = std::fs::read_to_string(dir.path().join("bc.exponents.csv")).unwrap();
    assert_eq!(exps.lines().next(), Some("n,exponent"));
    assert_eq!(exps.lines().count(), 3);
}

#[test]
fn records_carry_hash_and_version() {
    let a = records(&digitfrac(&["dim"]));
    let b = records(&digitfrac(&["dim", "--seed", "0"]));
    let c = records(&digitfrac(&["dim", "--seed", "9"]));
    assert_eq!(a[0]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(a[0]["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(a[0]["config_hash"], b[0]["config_hash"]);
    assert_ne!(a[0]["config_hash"], c[0]["config_hash"]);
}

#[test]
fn identical_runs_are_byte_identical() {
    for cmd in ["verify", "cover", "mtp", "series"] {
        let one = digitfrac(&[cmd, "--seed", "5", "--threads", "1"]);
        let many = digitfrac(&[cmd, "--seed", "5", "--threads", "4"]);
        assert_eq!(one.stdout, many.stdout, "{cmd}");
        assert!(!one.stdout.is_empty());
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(digitfrac(&["verify"]).status.code(), Some(0));

    let corrupt = write_config(dir.path(), "corrupt.json", r#"{"verify": {"inject_corruption": true}}"#);
    let out = digitfrac(&["verify", "--config", &corrupt]);
    assert_eq!(out.status.code(), Some(1));
    let summary = &records(&out)[0];
    assert_eq!(summary["pass"], false);
    let failed = summary["suites"].as_array().unwrap().iter().find(|s| s["pass"] == false).unwrap();
    assert_eq!(failed["counterexample"]["word"], serde_json::json!([0]));

    let over_cap = write_config(dir.path(), "cap.json", r#"{"guards": {"max_words": 100000000}}"#);
    assert_eq!(digitfrac(&["verify", "--config", &over_cap]).status.code(), Some(2));

    let tight = write_config(dir.path(), "tight.json", r#"{"guards": {"max_words": 10}}"#);
    assert_eq!(digitfrac(&["verify", "--config", &tight]).status.code(), Some(3));

    let bad = write_config(dir.path(), "bad.json", r#"{"set": {"base": 3, "coords": [[0, 1, 2]]}}"#);
    assert_eq!(digitfrac(&["dim", "--config", &bad]).status.code(), Some(2));
    let unknown = write_config(dir.path(), "unknown.json", r#"{"colour": "blue"}"#);
    assert_eq!(digitfrac(&["dim", "--config", &unknown]).status.code(), Some(2));
    assert_eq!(digitfrac(&["dim", "--config", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(digitfrac(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(digitfrac(&["verify", "--threads", "0"]).status.code(), Some(2));
}
