use std::fs;
use std::path::Path;
use std::process::Command;

use thickflame::cli::run;
use thickflame::config::{Mode, RunConfig};
use thickflame::io::read_csv;

fn config(mode: Mode, dir: &Path) -> RunConfig {
    let mut c = RunConfig::defaults(mode);
    c.output_dir = dir.to_path_buf();
    c
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn wave_csv_has_unit_temperature_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config(Mode::Wave, dir.path())).unwrap();
    let (h, rows) = read_csv(&dir.path().join("wave.csv")).unwrap();
    let (x, th) = (column(&h, "x"), column(&h, "theta"));
    let origin = rows.iter().find(|r| r[x] == 0.0).unwrap();
    assert_eq!(origin[th], 1.0);
    assert!(report.artifacts.iter().any(|p| p.ends_with("wave.vl.json")));
    assert!(dir.path().join("manifest-wave.json").exists());
}

#[test]
fn lecrit_table_first_row() {
    let dir = tempfile::tempdir().unwrap();
    run(&config(Mode::Lecrit, dir.path())).unwrap();
    let (h, rows) = read_csv(&dir.path().join("lecrit.csv")).unwrap();
    assert_eq!(rows[0][column(&h, "k")], 1.0);
    assert!((rows[0][column(&h, "le_c")] - 0.5641).abs() < 5e-4);
    assert_eq!(rows.len(), 8);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for (mode, stem) in [(Mode::Wave, "wave"), (Mode::Dispersion, "dispersion")] {
        let c = config(mode, dir.path());
        run(&c).unwrap();
        let first = fs::read(dir.path().join(format!("{stem}.csv"))).unwrap();
        let spec = fs::read(dir.path().join(format!("{stem}.vl.json"))).unwrap();
        run(&c).unwrap();
        assert_eq!(first, fs::read(dir.path().join(format!("{stem}.csv"))).unwrap());
        assert_eq!(spec, fs::read(dir.path().join(format!("{stem}.vl.json"))).unwrap());
    }
}

#[test]
fn validate_passes_at_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config(Mode::Validate, dir.path())).unwrap();
    assert!(report.lines.iter().all(|l| l.starts_with("[PASS]")), "{:?}", report.lines);
    let (_, rows) = read_csv(&dir.path().join("validate.csv")).unwrap();
    assert!(rows.len() >= 5);
}

#[test]
fn short_linear_run_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Linear, dir.path());
    c.n_x = 12;
    c.n_y = 8;
    c.t_final = 2e-3;
    c.snapshot_every = 1;
    run(&c).unwrap();
    let (h, rows) = read_csv(&dir.path().join("linear_traces.csv")).unwrap();
    assert_eq!(h, vec!["t", "y", "u_trace", "w_trace"]);
    assert_eq!(rows.len(), 3 * 8);
    assert!(dir.path().join("linear_traces.vl.json").exists());
}

#[test]
fn short_nonlinear_run_writes_fronts_and_fields() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(Mode::Nonlinear, dir.path());
    c.n_x = 10;
    c.n_y = 8;
    c.t_final = 5e-5;
    c.snapshot_every = 1;
    let report = run(&c).unwrap();
    let (_, fronts) = read_csv(&dir.path().join("nonlinear_interfaces.csv")).unwrap();
    assert_eq!(fronts.len(), 6 * 8);
    let (h, fields) = read_csv(&dir.path().join("nonlinear_fields.csv")).unwrap();
    assert_eq!(h.len(), 6);
    assert_eq!(fields.len(), 3 * 11 * 8);
    assert!(report.lines.iter().any(|l| l.contains("pattern detector")));
}

#[test]
fn binary_reports_invalid_width() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_thickflame"))
        .args(["wave", "--ell=-1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ell"));
}

#[test]
fn binary_reads_config_file_and_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# lecrit at a narrower strip\nell = 50\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_thickflame"))
        .args(["lecrit", "--config"])
        .arg(&cfg)
        .env("THICKFLAME_OUT", dir.path().join("env-out"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("env-out/lecrit.csv")).unwrap();
    assert!(text.contains("# ell = 50"));
}

#[test]
fn unknown_subcommand_fails() {
    let out = Command::new(env!("CARGO_BIN_EXE_thickflame"))
        .arg("bogus")
        .output()
        .unwrap();
    assert!(!out.status.success());
}
