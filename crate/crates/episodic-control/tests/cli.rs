//! Smoke tests for the command-line binary: a tiny real run, a sweep, the
//! seed override, and config errors surfacing with a failing exit status.

use std::path::Path;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_episodic-control"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("experiment.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

const TINY_FORAGE: &str = "\
task=forage
episodes=5
seeds=0,1
epsilon=0.2
gamma=0.99
k=3
";

#[test]
fn run_writes_per_seed_and_aggregate_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY_FORAGE);
    let out = dir.path().join("results");
    let output = binary()
        .args(["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("seed 0:"), "stdout: {stdout}");
    assert!(stdout.contains("aggregate:"), "stdout: {stdout}");
    for name in ["seed_0.csv", "seed_1.csv", "aggregate.csv"] {
        let text = std::fs::read_to_string(out.join(name)).unwrap();
        assert!(text.lines().count() > 1, "{name} has no data rows");
    }
}

#[test]
fn seeds_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY_FORAGE);
    let out = dir.path().join("results");
    let output = binary()
        .args([
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seeds",
            "9",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    assert!(out.join("seed_9.csv").exists());
    assert!(!out.join("seed_0.csv").exists());
}

#[test]
fn sweep_writes_the_sweep_report_and_per_k_directories() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), TINY_FORAGE);
    let out = dir.path().join("sweep");
    let output = binary()
        .args([
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--sweep-k",
            "1,3",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().next(), Some("k,final_score_mean,final_score_sem"));
    assert_eq!(sweep.lines().count(), 3);
    assert!(out.join("k_1").join("seed_0.csv").exists());
    assert!(out.join("k_3").join("aggregate.csv").exists());
}

#[test]
fn config_errors_carry_line_numbers_and_fail_the_process() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "task=forage\nepsilon=2.5\n");
    let output = binary()
        .args(["run", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}
