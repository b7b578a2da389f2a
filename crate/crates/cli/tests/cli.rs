use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn hls_stab(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hls-stab"));
    cmd.args(args).env_remove("HLS_STAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn run_config(scenario: &str, file: &str, out: &Path, env: &[(&str, &str)]) -> Output {
    let config = configs().join(file);
    hls_stab(&[scenario, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()], env)
}

#[test]
fn constants_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("constants", "constants.json", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("C_N_mu"), "{stdout}");
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], serde_json::Value::Bool(true));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"params\": ").unwrap();
    let out = hls_stab(&["constants", "--config", bad.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_scenario_exits_2() {
    let config = configs().join("constants.json");
    let out = hls_stab(&["no-such-scenario", "--config", config.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scenario_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("stability", "constants.json", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_thread_env_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("constants", "constants.json", dir.path(), &[("HLS_STAB_THREADS", "many")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fuzz_output_is_deterministic_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_config("ineq-fuzz", "ineq-fuzz.json", a.path(), &[("HLS_STAB_THREADS", "1")]);
    let rb = run_config("ineq-fuzz", "ineq-fuzz.json", b.path(), &[("HLS_STAB_THREADS", "3")]);
    assert_eq!(ra.status.code(), Some(0));
    assert_eq!(rb.status.code(), Some(0));
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("records.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn interaction_sweep_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("interaction-sweep", "interaction-dilation.json", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert!(csv.starts_with("# hls-stab v1 interaction-sweep\n"));
}
