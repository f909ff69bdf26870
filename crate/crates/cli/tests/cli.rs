//! End-to-end checks of the binary: generate, estimate, sweep, oracle.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mienf")
}

fn write_spec(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("exp.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mienf_cli_{tag}_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const QUICK_SPEC: &str = r#"
[dataset]
family = "correlated_gaussian"
dim_x = 2
samples = 2000

[estimator]
name = "closed_form"

[sweep]
mi_start = 0.0
mi_stop = 2.0
mi_steps = 3
repeats = 2
base_seed = 7
"#;

#[test]
fn generate_then_estimate() {
    let dir = temp_dir("gen");
    let spec = write_spec(&dir, QUICK_SPEC);
    let out = Command::new(bin())
        .args(["generate", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let data = dir.join("mi_2.0000.csv");
    assert!(data.exists());
    assert!(dir.join("mi_2.0000.csv.meta.json").exists());

    let report = dir.join("report.json");
    let out = Command::new(bin())
        .args(["estimate", "--spec"])
        .arg(&spec)
        .arg("--data")
        .arg(&data)
        .arg("--out")
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("closed_form: estimate"), "stdout: {text}");
    assert!(report.exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_writes_deterministic_csv() {
    let dir = temp_dir("sweep");
    let spec = write_spec(&dir, QUICK_SPEC);
    let run = |out_dir: &Path, jobs: &str| {
        let out = Command::new(bin())
            .args(["sweep", "--spec"])
            .arg(&spec)
            .arg("--out")
            .arg(out_dir)
            .args(["--jobs", jobs])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(out_dir.join("results.csv")).unwrap()
    };
    let a = run(&dir.join("a"), "1");
    let b = run(&dir.join("b"), "2");
    // identical bytes modulo the wall-time column
    let strip = |csv: &str| -> Vec<String> {
        csv.lines()
            .map(|l| l.split(',').take(5).collect::<Vec<_>>().join(","))
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.lines().count(), 1 + 6);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_exit_code_two_on_errored_cells() {
    // Student target below the correction term: every cell errors, the
    // sweep still completes and exits with code 2
    let dir = temp_dir("err");
    let spec = write_spec(
        &dir,
        r#"
[dataset]
family = "student"
dim_x = 3
dim_y = 3
dof = 4
samples = 400

[estimator]
name = "closed_form"

[sweep]
mi_start = 0.0
mi_stop = 0.0
mi_steps = 1
repeats = 2
base_seed = 3
"#,
    );
    let out = Command::new(bin())
        .args(["sweep", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let csv = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2);
    assert!(csv.contains("NaN"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn oracle_validates_labels() {
    let dir = temp_dir("oracle");
    let spec = write_spec(
        &dir,
        r#"
[dataset]
family = "smoothed_uniform"
dim_x = 2
samples = 100

[estimator]
name = "closed_form"

[sweep]
mi_start = 1.0
mi_stop = 1.0
mi_steps = 1
repeats = 1
base_seed = 9
"#,
    );
    let out = Command::new(bin())
        .args(["oracle", "--spec"])
        .arg(&spec)
        .args(["--mc", "100000"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("oracle"), "stdout: {text}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn rejects_unknown_estimator() {
    let dir = temp_dir("bad");
    let spec = write_spec(&dir, &QUICK_SPEC.replace("closed_form", "psychic"));
    let out = Command::new(bin())
        .args(["sweep", "--spec"])
        .arg(&spec)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    std::fs::remove_dir_all(&dir).ok();
}
