mod common;

use std::path::Path;
use std::process::{Command, Output};

use ellg::io::{to_toml, CSV_HEADER};

fn ellg_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellg-sim")).args(args).output().expect("spawn ellg-sim")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("film.toml");
    std::fs::write(&path, to_toml(&common::small_film_config())).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_csv_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("out");
    let o = ellg_sim(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap(), "--vtk-every", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("energy.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 6);
    for step in [0, 2, 4] {
        let vtk = std::fs::read_to_string(out.join(format!("state_{step:05}.vtk"))).unwrap();
        assert!(vtk.starts_with("# vtk DataFile Version"));
        assert!(vtk.contains("POINT_DATA") && vtk.contains("CELL_DATA"));
    }
    assert!(!out.join("state_00005.vtk").exists());
}

#[test]
fn preset_run_reports_system_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let o = ellg_sim(&["run", "--preset", "mumag1", "--tend", "0.02", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("V = 462") && stdout.contains("LLG system 924x924"), "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[llg]\nalpha = 0.5\n").unwrap();
    for args in [
        vec!["run", "--config", bad.to_str().unwrap()],
        vec!["run", "--preset", "nope"],
        vec!["run", "--preset", "mumag1", "--theta", "1.5"],
        vec!["run", "--preset", "mumag1", "--dt", "0.03"],
    ] {
        let o = ellg_sim(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = ellg_sim(&["run", "--preset", "mumag1", "--theta", "1.5"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("llg.theta"));
}

#[test]
fn theta_warning_is_printed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let o = ellg_sim(&["run", "--config", &cfg, "--theta", "0.4", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning: "));
}

#[test]
fn invariant_suite_passes() {
    let o = ellg_sim(&["check", "--suite", "invariants"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().count() >= 7);
    assert!(stdout.lines().all(|l| l.starts_with("[PASS]")), "{stdout}");
}

#[test]
fn audit_mesh_reports_both_regions() {
    let dir = tempfile::tempdir().unwrap();
    let vtk = dir.path().join("mesh.vtk");
    let o = ellg_sim(&["audit-mesh", "--preset", "mumag1", "--vtk", vtk.to_str().unwrap()]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("omega nodes 462"), "{stdout}");
    assert!(stdout.contains("omega:") && stdout.contains("Omega:"));
    assert!(std::fs::read_to_string(vtk).unwrap().contains("CELLS 4752"));
}
