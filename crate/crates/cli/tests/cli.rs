use std::path::Path;
use std::process::Command;

fn kpzlab(dir: &Path, args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_kpzlab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn kpzlab");
    out.status.code().expect("exit code")
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(kpzlab(d, &["run-experiment", "stationarity"]), 0);
    assert_eq!(kpzlab(d, &["run-experiment", "no-such-experiment"]), 2);
    assert_eq!(kpzlab(d, &["no-such-command"]), 2);
    assert_eq!(kpzlab(d, &["tw-cdf", "--bogus-flag"]), 2);
    assert_eq!(kpzlab(d, &["--workers", "0", "tw-cdf"]), 2);
    assert_eq!(kpzlab(d, &["run-experiment", "stationarity", "--param", "nonsense=1"]), 2);
    assert_eq!(kpzlab(d, &["--config", "missing.json", "tw-cdf"]), 2);
    assert_eq!(kpzlab(d, &["exact-prob", "--y", "1,0", "--x", "0,1", "--t", "1", "--p", "0.3"]), 2);
}

#[test]
fn failing_statistics_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // Too few samples to resolve the edge law.
    let code = kpzlab(
        dir.path(),
        &["run-experiment", "tw-edge", "--param", "n=4", "--param", "samples=20"],
    );
    assert_eq!(code, 1);
}

#[test]
fn config_file_drives_run_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"experiment": "catalan-bridge", "params": {"order": 6}, "seed": 9, "out": "art"}"#,
    )
    .unwrap();
    assert_eq!(kpzlab(dir.path(), &["--config", cfg.to_str().unwrap(), "run-experiment"]), 0);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("art/catalan-bridge.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 9);
    std::fs::write(&cfg, r#"{"experiment": "catalan-bridge", "typo": 1}"#).unwrap();
    assert_eq!(kpzlab(dir.path(), &["--config", cfg.to_str().unwrap(), "run-experiment"]), 2);
}

#[test]
fn single_worker_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--seed", "42", "--workers", "1", "simulate-asep", "--t", "20", "--samples", "8", "--p", "0.25"];
    assert_eq!(kpzlab(a.path(), &args), 0);
    assert_eq!(kpzlab(b.path(), &args), 0);
    let x = std::fs::read(a.path().join("out/simulate-asep.csv")).unwrap();
    let y = std::fs::read(b.path().join("out/simulate-asep.csv")).unwrap();
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn worker_count_does_not_change_samples() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let run = |d: &Path, w: &str| {
        kpzlab(d, &["--seed", "7", "--workers", w, "simulate-asep", "--t", "10", "--samples", "6"])
    };
    assert_eq!(run(a.path(), "1"), 0);
    assert_eq!(run(b.path(), "3"), 0);
    let x = std::fs::read(a.path().join("out/simulate-asep.csv")).unwrap();
    let y = std::fs::read(b.path().join("out/simulate-asep.csv")).unwrap();
    assert_eq!(x, y);
}
