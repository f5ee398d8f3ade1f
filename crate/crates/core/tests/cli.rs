use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use oct_align::config::ExperimentConfig;
use oct_align::propagator::{FieldGrid, TimeGrid};
use oct_align::rotor::MoleculeParams;
use oct_align::runner::{field_csv, read_field};

fn oct_align(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oct-align"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn energy(f: &FieldGrid) -> f64 {
    f.values().iter().map(|v| v * v).sum()
}

fn noise_field(grid: TimeGrid) -> FieldGrid {
    let mut state: u64 = 0x2545_f491_4f6c_dd1d;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let values = (0..grid.n_points()).map(|_| next()).collect();
    let mut f = FieldGrid::new(grid, values).unwrap();
    f.pin_endpoints();
    f
}

#[test]
fn run_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let out = oct_align(&["run", "--preset", "paper-3.1", "--max-iters", "2", "--out", dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("paper-3.1: k=2"));
    }
    for name in ["config.toml", "iterations.csv", "field.csv", "field_filtered.csv", "cos2.csv", "spectrum.csv", "run.log"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty(), "{name} is empty");
        assert_eq!(x, y, "{name} differs between identical runs");
    }
    let log = fs::read_to_string(a.path().join("iterations.csv")).unwrap();
    assert_eq!(log.lines().count(), 4);
    assert!(log.lines().nth(1).unwrap().split(',').nth(4).unwrap().is_empty());
}

#[test]
fn optimized_field_stays_in_band_when_mu_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = oct_align(&["run", "--preset", "paper-3.1", "--max-iters", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let log = fs::read_to_string(dir.path().join("iterations.csv")).unwrap();
    let last_mu: f64 = log.lines().last().unwrap().split(',').nth(4).unwrap().parse().unwrap();
    assert_eq!(last_mu, 0.0);

    let exp = ExperimentConfig::preset("paper-3.1").unwrap().resolve().unwrap();
    let field = read_field(&dir.path().join("field.csv")).unwrap();
    let (_, report) = oct_align::runner::filter_field(&field, &exp.filter).unwrap();
    assert!(report.out_of_band_before < 1e-10, "{report}");
}

#[test]
fn invalid_config_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::preset("paper-3.1").unwrap();
    cfg.cost.lambda0 = -1.0;
    let path = dir.path().join("bad.toml");
    fs::write(&path, cfg.to_toml()).unwrap();
    let out_dir = dir.path().join("out");
    let out = oct_align(&["run", "--config", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cost.lambda0"));
    assert!(!out_dir.exists());
}

#[test]
fn malformed_toml_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    fs::write(&path, "[grid]\nn_steps = 12\nt_final = 3 ps\n").unwrap();
    let out = oct_align(&["run", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn filter_field_keeps_in_band_field() {
    let dir = tempfile::tempdir().unwrap();
    let params = MoleculeParams::carbon_monoxide();
    let grid = TimeGrid::new(10.0 * params.rotational_period(), 8192).unwrap();
    let w = 10.0 * params.b();
    let field = FieldGrid::from_fn(grid, |t| 0.01 * (w * t).sin()).unwrap();
    let input = dir.path().join("in.csv");
    fs::write(&input, field_csv(&field)).unwrap();
    let out = oct_align(&["filter-field", input.to_str().unwrap(), "--preset", "paper-3.1", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("out-of-band"));
    let filtered = read_field(&dir.path().join("field_filtered.csv")).unwrap();
    for (a, b) in filtered.values().iter().zip(field.values()) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn filter_field_removes_energy_from_noise() {
    let dir = tempfile::tempdir().unwrap();
    let exp = ExperimentConfig::preset("paper-3.2-5K-64px").unwrap().resolve().unwrap();
    let field = noise_field(exp.grid);
    let input = dir.path().join("noise.csv");
    fs::write(&input, field_csv(&field)).unwrap();
    let out = oct_align(&["filter-field", input.to_str().unwrap(), "--preset", "paper-3.2-5K-64px", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let filtered = read_field(&dir.path().join("field_filtered.csv")).unwrap();
    assert!(energy(&filtered) < energy(&field));
}

#[test]
fn filter_field_reports_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "t_au,E_au\n0,0\n1,0.1\n2,oops\n3,0\n").unwrap();
    let out = oct_align(&["filter-field", input.to_str().unwrap(), "--preset", "paper-3.1", "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 4"));
}

#[test]
fn constants_and_spectrum() {
    let out = oct_align(&["constants"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("t_per = 8.637"));
    assert!(text.contains("26B,50.206000"));

    let dir = tempfile::tempdir().unwrap();
    let grid = TimeGrid::new(5000.0, 100).unwrap();
    let input = dir.path().join("f.csv");
    fs::write(&input, field_csv(&noise_field(grid))).unwrap();
    let out = oct_align(&["spectrum", input.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--unit", "thz"]);
    assert!(out.status.success());
    let spectrum = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(spectrum.starts_with("frequency_thz,normalized_power\n"));
    assert_eq!(spectrum.lines().count(), 52);
}

#[test]
fn presets_are_listed() {
    let out = oct_align(&["constants", "--list-presets"]);
    let text = stdout(&out);
    for name in ["paper-3.1", "paper-3.2-5K-128px", "paper-3.2-10K-256px"] {
        assert!(text.lines().any(|l| l == name), "{name} missing");
    }
    assert!(Path::new(env!("CARGO_BIN_EXE_oct-align")).exists());
}
