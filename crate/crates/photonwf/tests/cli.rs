//! End-to-end runs of the `photonwf` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/full_pipeline.scenario");

fn photonwf(args: &[&str], extra: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_photonwf"));
    cmd.args(args);
    if let Some(p) = extra {
        cmd.arg(p);
    }
    cmd.output().expect("binary runs")
}

fn summary_value<'a>(summary: &'a str, key: &str) -> Option<&'a str> {
    summary.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
}

#[test]
fn fixture_run_writes_every_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = photonwf(&["run", FIXTURE, "--out"], Some(dir.path()));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert_eq!(summary_value(&summary, "status"), Some("ok"));
    for i in 0..8 {
        let file = summary_value(&summary, &format!("stage.{i}.output")).unwrap();
        let csv = fs::read_to_string(dir.path().join(file)).unwrap();
        let mut lines = csv.lines();
        let cols = lines.next().unwrap().split(',').count();
        assert!(lines.clone().count() > 0);
        assert!(lines.all(|l| l.split(',').count() == cols));
    }
    let roundtrip: f64 = summary_value(&summary, "stage.1.roundtrip_max_error")
        .unwrap()
        .parse()
        .unwrap();
    assert!(roundtrip < 1e-12);
    let defect: f64 = summary_value(&summary, "stage.5.partition_defect_h")
        .unwrap()
        .parse()
        .unwrap();
    assert!(defect < 1e-10);
    assert!(summary.contains("[exit_codes]"));
    assert!(!dir.path().join("FAILED").exists());
}

#[test]
fn seed_override_changes_the_state() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(photonwf(&["run", FIXTURE, "--out"], Some(&a)).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_photonwf"))
        .args(["run", FIXTURE, "--seed", "99", "--out"])
        .arg(&b)
        .output()
        .unwrap();
    assert!(out.status.success());
    let sa = fs::read_to_string(a.join("summary.txt")).unwrap();
    let sb = fs::read_to_string(b.join("summary.txt")).unwrap();
    assert_ne!(
        summary_value(&sa, "state.energy_total"),
        summary_value(&sb, "state.energy_total")
    );
}

#[test]
fn si_units_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_photonwf"))
        .args(["run", FIXTURE, "--units", "si", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert_eq!(summary_value(&s, "units"), Some("si"));
    let defect: f64 = summary_value(&s, "stage.0.parseval_defect").unwrap().parse().unwrap();
    assert!(defect < 1e-10);
}

#[test]
fn invalid_scenarios_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    for (text, key) in [
        ("[grid]\nn_per_axis = 8\n", "grid.box_length"),
        ("[grid]\nn_per_axis = 8\nbox_length = 1\nkappa = 100\n", "grid.kappa"),
        (
            "[grid]\nn_per_axis = 8\nbox_length = 1\n[stage.1]\ntype = observables\n",
            "stage.0.type",
        ),
        ("units = cgs\n[grid]\nn_per_axis = 8\nbox_length = 1\n", "units"),
    ] {
        fs::write(&path, text).unwrap();
        for sub in ["validate", "run"] {
            let out = photonwf(&[sub], Some(&path));
            let err = String::from_utf8_lossy(&out.stderr);
            assert_eq!(out.status.code(), Some(2), "{sub} {key}: {err}");
            assert!(err.contains(key), "{sub}: {err}");
        }
    }
    let out = photonwf(&["validate"], Some(&dir.path().join("missing.txt")));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unstable_leapfrog_step_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.txt");
    fs::write(
        &path,
        "[grid]\nn_per_axis = 8\nbox_length = 6.283185307179586\n[stage.0]\ntype = evolve\nscheme = leapfrog\ndt = 10\n",
    )
    .unwrap();
    let out = photonwf(&["validate"], Some(&path));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage.0.dt"));
}

#[test]
fn list_transforms_names_all_eight() {
    let out = photonwf(&["list-transforms"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["T+", "T-", "Tx", "Ty", "invT+", "invT-", "invTx", "invTy"] {
        assert!(
            text.lines().any(|l| l.split_whitespace().next() == Some(name)),
            "{name}"
        );
    }
}
