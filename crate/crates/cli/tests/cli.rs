use std::path::Path;
use std::process::{Command, Output};

fn qoeshare(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qoeshare"))
        .args(args)
        .env("QOESHARE_OUT", out)
        .output()
        .expect("spawn qoeshare")
}

fn config(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn run_writes_artifacts_to_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("small.toml");
    let out = qoeshare(&["run", "--config", &cfg, "--horizon", "300"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["summary.csv", "debts.csv", "sharing.csv", "sharing.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("mode sharing-delayed-2"));
}

#[test]
fn out_flag_beats_env() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let cfg = config("small.toml");
    let flag = flag_dir.path().to_str().unwrap();
    let out = qoeshare(
        &["run", "--config", &cfg, "--horizon", "100", "--mode", "no-sharing", "--out", flag],
        env_dir.path(),
    );
    assert!(out.status.success());
    assert!(flag_dir.path().join("summary.csv").exists());
    assert!(!env_dir.path().join("summary.csv").exists());
    assert!(String::from_utf8_lossy(&out.stdout).contains("mode no-sharing"));
}

#[test]
fn seed_changes_the_run_and_repeats_byte_for_byte() {
    let cfg = config("small.toml");
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (dir, seed) in dirs.iter().zip(["1", "1", "2"]) {
        let out = qoeshare(&["run", "--config", &cfg, "--horizon", "200", "--seed", seed], dir.path());
        assert!(out.status.success());
    }
    let read = |i: usize| std::fs::read(dirs[i].path().join("summary.csv")).unwrap();
    assert_eq!(read(0), read(1));
    assert_ne!(read(0), read(2));
}

#[test]
fn sweep_writes_family_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = qoeshare(
        &["sweep", "multi-region", "--reps", "1", "--horizon", "50", "--seed", "3"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in [
        "multi-region_runs.csv",
        "multi-region_summary.csv",
        "multi-region_regions.csv",
        "multi-region_region_summary.csv",
        "multi-region_improvement.svg",
        "multi-region_regions.svg",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn unknown_family_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = qoeshare(&["sweep", "fig-42"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig-42"));
}

#[test]
fn delay_without_delayed_mode_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("default.toml");
    let out = qoeshare(&["run", "--config", &cfg, "--delay", "2", "--horizon", "10"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn analytic_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = qoeshare(&["analytic", "--rho", "0.5", "--d-max", "1", "--d-step", "0.5"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("analytic.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    let p: f64 = rows[2].split(',').nth(3).unwrap().parse().unwrap();
    assert!((p - 0.5647).abs() < 1e-4);
    assert!(dir.path().join("analytic.svg").exists());
}

#[test]
fn plot_names_missing_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("in.csv");
    std::fs::write(&csv, "a,b\n1,2\n2,3\n").unwrap();
    let csv = csv.to_str().unwrap();
    let ok = qoeshare(&["plot", csv, "--x", "a", "--y", "b", "--name", "ab.svg"], dir.path());
    assert!(ok.status.success());
    assert!(dir.path().join("ab.svg").exists());
    let bad = qoeshare(&["plot", csv, "--x", "a", "--y", "zz"], dir.path());
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("zz"));
}
