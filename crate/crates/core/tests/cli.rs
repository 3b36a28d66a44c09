use std::process::{Command, Output};

fn cmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn storage_reports_byte_counts() {
    let o = cmm(&["storage", "--config", "default"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    assert_eq!(row, "66,2,444,34848,2664,528,0.949036");
}

#[test]
fn storage_follows_queue_states() {
    let o = cmm(&["storage", "--queue-states", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("30,2,"));
}

#[test]
fn solve_is_repeatable() {
    let a = cmm(&["solve"]);
    let b = cmm(&["solve"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("k_nz 444"));
}

#[test]
fn solve_writes_policy_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("policy.csv");
    let o = cmm(&["solve", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 67);
}

#[test]
fn sweep_writes_three_series() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = cmm(&["sweep", "--method", "all", "--seeds", "1", "--r2", "5,10", "--nq", "2,6", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("series,method,parameter,value"));
    let series: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(series, ["on-off", "on-off", "mdp", "mdp", "ql", "ql"]);
}

#[test]
fn simulate_emits_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let o = cmm(&["simulate", "--method", "threshold", "--json", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert!(v.to_string().contains("avg_latency"));
}

#[test]
fn power_reports_crossovers() {
    let o = cmm(&["power", "--periods", "3600"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("svi vs ql crossover 2693.36 s"));
    assert!(stdout(&o).contains("ql,3600,7.88e-05"));
}

#[test]
fn missing_config_is_a_usage_error() {
    let o = cmm(&["solve", "--config", "/definitely/not/here.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[node]\nqueue_states = \"many\"\n").unwrap();
    let o = cmm(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(cmm(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(cmm(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn out_of_range_parameter_is_a_validation_error() {
    let o = cmm(&["solve", "--beta", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("discount"));
}
