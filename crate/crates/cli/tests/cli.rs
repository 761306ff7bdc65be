use std::path::Path;
use std::process::{Command, Output};

use crystalflow::metrics::hausdorff;
use crystalflow::{Grid, HausdorffMode, SurfaceMesh};

fn crystalflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crystalflow")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut full = vec!["run", "--out", dir.to_str().unwrap()];
    full.extend_from_slice(args);
    crystalflow(&full)
}

fn csv_rows(dir: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(dir.join("errors.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,dist_h2,dist_hinf"));
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

fn log(dir: &Path) -> String {
    std::fs::read_to_string(dir.join("run.log")).unwrap()
}

#[test]
fn cube2d_pipeline_writes_the_full_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--benchmark", "cube2d", "--M", "64", "--h", "1e-4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(dir.path());
    let times: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(times.len(), 26);
    for (k, t) in times.iter().enumerate() {
        assert!((t - 0.002 * k as f64).abs() < 1e-9);
    }
    let log = log(dir.path());
    let max: f64 = log
        .lines()
        .find_map(|l| l.strip_prefix("max dist_l2="))
        .expect("max line")
        .parse()
        .unwrap();
    assert!(max.is_finite() && max > 0.0);
    assert!(log.contains("\nM = 64\n") && log.contains("lambda-ratio = 0.125"));
    assert_eq!(log.lines().filter(|l| l.starts_with("step=")).count(), 500);
    assert!(log.lines().any(|l| l.starts_with("extinction ")));
}

#[test]
fn sponge_logs_hole_closure_before_extinction() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--benchmark", "sponge", "--M", "16", "--h", "1e-3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = log(dir.path());
    let value = |prefix: &str| -> f64 {
        log.lines().find_map(|l| l.strip_prefix(prefix)).unwrap_or_else(|| panic!("no `{prefix}` line")).parse().unwrap()
    };
    let closed = value("hole-closed t=");
    let extinct = value("extinction t=");
    assert!(closed < extinct, "{closed} vs {extinct}");
}

#[test]
fn window_after_extinction_gives_an_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--benchmark", "torus-l1", "--M", "16", "--window", "0.045,0.05"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(csv_rows(dir.path()).is_empty());
}

#[test]
fn invalid_values_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--h", "0"][..], &["--M", "100"], &["--metric", "l1"], &["--anisotropy", "octagon"]] {
        let out = run_in(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let key = args[0].trim_start_matches("--");
        assert!(String::from_utf8_lossy(&out.stderr).contains(&format!("`{key}`")), "{args:?}");
    }
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "M = 32\ngrid = 64\n").unwrap();
    let out = crystalflow(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`grid`"));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "benchmark = hex2d\nM = 32\nh = 1e-3\ntmax = 0.004\n").unwrap();
    let out = run_in(dir.path(), &["--config", cfg.to_str().unwrap(), "--M", "16"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = log(dir.path());
    assert!(log.contains("benchmark = hex2d") && log.contains("\nM = 16\n"));
    assert_eq!(csv_rows(dir.path()).len(), 3);
}

#[test]
fn unconverged_solves_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--M", "16", "--h", "1e-3", "--tmax", "1e-3", "--btol", "1e-300"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(log(dir.path()).contains("converged=false"));
}

#[test]
fn runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--benchmark", "hex2d", "--M", "32", "--h", "1e-4", "--tmax", "0.004"];
    assert!(run_in(a.path(), &args).status.success());
    assert!(run_in(b.path(), &args).status.success());
    let read = |d: &Path| std::fs::read(d.join("errors.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn exported_meshes_reimport_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--benchmark", "cube3d", "--M", "16", "--h", "1e-3", "--tmax", "0.002", "--export-mesh"];
    assert!(run_in(dir.path(), &args).status.success());
    let meshes = dir.path().join("meshes");
    let mut count = 0;
    for entry in std::fs::read_dir(&meshes).unwrap() {
        let path = entry.unwrap().path();
        let mesh = SurfaceMesh::read_obj(&path, 3).unwrap();
        assert!(!mesh.is_empty());
        assert_eq!(mesh.to_obj(), std::fs::read_to_string(&path).unwrap());
        // zero up to rounding in the point-triangle distances
        let d = hausdorff(&mesh, &mesh, Grid::new(3, 16).unwrap(), HausdorffMode::Inf).unwrap();
        assert!(d < 1e-12, "{}: {d}", path.display());
        count += 1;
    }
    // numerical and exact surfaces at t = 0 and t = 0.002
    assert_eq!(count, 4);
}

#[test]
fn sweep_writes_one_directory_per_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--benchmark", "cube2d", "--h", "1e-3", "--tmax", "0.004", "--sweep", "M=16,32"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for m in [16, 32] {
        let sub = dir.path().join(format!("M{m}"));
        assert!(log(&sub).contains(&format!("\nM = {m}\n")));
        assert_eq!(csv_rows(&sub).len(), 3);
    }
}

#[test]
fn list_names_every_benchmark() {
    let out = crystalflow(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in crystalflow::benchmark::NAMES {
        assert!(text.contains(name));
    }
}
