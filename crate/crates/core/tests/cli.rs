use std::process::{Command, Output};

fn offload(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_offload"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn validate_defaults() {
    let o = offload(&["validate"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("configuration ok"));
}

#[test]
fn validate_rejects_bad_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"scenario": {"k_s": 0}}"#).unwrap();
    let o = offload(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("k_s"));
}

#[test]
fn missing_config_is_io_error() {
    let o = offload(&["validate", "--config", "/nonexistent/offload.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = offload(&["run", "--policy", "minimum", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    let o = offload(&["run", "--policy", "greedy"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_is_repeatable() {
    let a = offload(&["run", "--policy", "deterministic", "--seed", "7"]);
    let b = offload(&["run", "--policy", "deterministic", "--seed", "7"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("satisfaction_ratio"));
}

#[test]
fn run_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one.csv");
    let o = offload(&["run", "--policy", "rand", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("policy,n_subnets,tasks_per_subnet"));
    assert!(lines[1].starts_with("random,5,5,30"));
}

#[test]
fn sweep_needs_an_output() {
    let o = offload(&["sweep"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("grid.json");
    let out = dir.path().join("grid.csv");
    std::fs::write(
        &cfg,
        r#"{"sweep": {"n_subnets_list": [2], "tasks_list": [5], "sinr_wan_db_list": [0, 30], "seeds": [0, 1]}}"#,
    )
    .unwrap();
    let o = offload(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("wrote 12 rows"));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 13);
}

#[test]
fn oracle_on_tiny_instance() {
    let o = offload(&["oracle", "--runs", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.ends_with(" match")).count(), 6, "{text}");
    assert!(text.contains("minimum matched 3/3, deterministic matched 3/3"));
}
