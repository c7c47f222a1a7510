use std::process::{Command, Output};

fn abdirac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abdirac")).args(args).output().expect("spawn abdirac")
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(abdirac(&["--help"]).status.code(), Some(0));
    assert_eq!(abdirac(&[]).status.code(), Some(2));
    assert_eq!(abdirac(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(abdirac(&["kernel", "--p", "banana"]).status.code(), Some(2));
}

#[test]
fn out_of_range_parameters_are_usage_errors() {
    let out = abdirac(&["kernel", "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let out = abdirac(&["smoothing", "--gamma", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_is_deterministic_and_passes() {
    let a = abdirac(&["selftest", "--seed", "42"]);
    let b = abdirac(&["selftest", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["command"], "selftest");
}

#[test]
fn output_file_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"alpha": 0.5, "l": 1}"#).unwrap();
    let out = dir.path().join("k.json");
    let status = abdirac(&[
        "kernel",
        "--config",
        cfg.to_str().unwrap(),
        "--e-max",
        "0",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["alpha"], 0.5);
    assert_eq!(v["config"]["l"], 1);

    std::fs::write(&cfg, r#"{"alpah": 0.5}"#).unwrap();
    assert_eq!(abdirac(&["kernel", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(abdirac(&["kernel", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
}

#[test]
fn csv_output_has_header_comments() {
    let out = abdirac(&["bessel", "--lambda", "0.5,1", "--rmax", "20", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# abdirac "));
    assert!(text.lines().any(|l| l == "# command: bessel"));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(data.len() > 2);
}

#[test]
fn normcheck_reports_agreement() {
    let out = abdirac(&["normcheck", "--alpha", "0.3", "--l-min", "-2", "--l-max", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.to_string().contains("norm-identity"));
}
