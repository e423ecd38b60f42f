//! End-to-end tests of the `cpikan` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cpikan"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn all_shipped_configs_are_valid() {
    let dir = configs_dir();
    let mut checked = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if !name.ends_with(".toml") || name.starts_with("suite") {
            continue;
        }
        cpikan::experiment::ExperimentConfig::load(&path)
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        checked += 1;
    }
    assert!(checked >= 10, "expected the shipped config set, found {checked}");
}

#[test]
fn run_subcommand_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "run",
            configs_dir()
                .join("diffusion_m2_scaled_ckan.toml")
                .to_str()
                .unwrap(),
            "--epochs-scale",
            "0.002",
            "--deterministic",
            "--out-dir",
            tmp.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["config.json", "history.csv", "summary.json", "prediction.csv"] {
        assert!(tmp.path().join(f).exists(), "missing {f}");
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("status=ok"), "stdout: {stdout}");
}

#[test]
fn reruns_with_same_seed_are_byte_identical() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&d1, &d2] {
        let out = bin()
            .args([
                "run",
                configs_dir()
                    .join("diffusion_m2_scaled_ckan.toml")
                    .to_str()
                    .unwrap(),
                "--epochs-scale",
                "0.002",
                "--seed",
                "42",
                "--deterministic",
                "--out-dir",
                dir.path().to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    for f in ["history.csv", "summary.json", "prediction.csv"] {
        let a = std::fs::read(d1.path().join(f)).unwrap();
        let b = std::fs::read(d2.path().join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
}

#[test]
fn check_derivatives_subcommand_passes() {
    let out = bin()
        .args(["check-derivatives", "--networks", "5", "--seed", "1"])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout: {stdout}");
    assert!(stdout.contains("derivative check passed"));
}

#[test]
fn emit_reference_writes_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "emit-reference",
            "--problem",
            "allen-cahn",
            "--m",
            "1",
            "--t-final",
            "0.05",
            "--out-dir",
            tmp.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("reference_allen_cahn.csv")).unwrap();
    assert!(csv.starts_with("t,x,u"));
    assert!(csv.lines().count() > 1000);
}

#[test]
fn emit_reference_rejects_unknown_problem() {
    let out = bin()
        .args(["emit-reference", "--problem", "diffusion"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("allen-cahn"));
}

#[test]
fn suite_subcommand_runs_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    // A fast two-config manifest pointing at the shipped configs.
    let manifest = tmp.path().join("suite.toml");
    std::fs::write(
        &manifest,
        format!(
            "configs = [{:?}, {:?}]",
            configs_dir().join("diffusion_m2_scaled_ckan.toml"),
            configs_dir().join("reaction_diffusion_forward_scaled_ckan.toml"),
        ),
    )
    .unwrap();
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args([
            "suite",
            manifest.to_str().unwrap(),
            "--epochs-scale",
            "0.001",
            "--deterministic",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = std::fs::read_to_string(out_dir.join("suite.csv")).unwrap();
    assert_eq!(table.lines().count(), 3, "table:\n{table}");
    assert!(table.lines().nth(1).unwrap().contains("ok"));
}
