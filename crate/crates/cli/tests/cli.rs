use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn spinbeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinbeam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, sub: &str, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    spinbeam(&args)
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn spectrum_header_and_default_grid() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), "spectrum", &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("spectrum.csv")).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "delta_over_g0,kappa,r,above_threshold");
    assert!(text.lines().next().unwrap().starts_with('#'));
    let rows = data_rows(&tmp.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 41 * 30);
    let zero_kappa: Vec<_> = rows.iter().filter(|r| r[1].parse::<f64>().unwrap() == 0.0).collect();
    assert_eq!(zero_kappa.len(), 41);
    assert!(zero_kappa.iter().all(|r| r[2].parse::<f64>().unwrap() == 0.0));
    let summary = json(&tmp.path().join("spectrum_summary.json"));
    assert!(summary["flux"]["definition"].as_str().unwrap().contains("sinh^2"));
}

#[test]
fn worked_kappa_row_and_flagged_threshold_row() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(
        tmp.path(),
        "spectrum",
        &["--grid", "d_points=1", "--grid", "kappa_min=1.333", "--grid", "kappa_max=1.5707963267948966", "--grid", "kappa_points=2"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&tmp.path().join("spectrum.csv"));
    assert_eq!(rows[0][1], "1.333");
    let r: f64 = rows[0][2].parse().unwrap();
    // large-M closed form as the oracle; M = 100 shifts it by < 1e-2
    let oracle = 1.333f64.sin().atanh();
    assert!((r - oracle).abs() < 1e-2, "{r} vs {oracle}");
    assert!((r - 2.115).abs() < 0.015, "{r}");
    assert_eq!(rows[0][3], "false");
    assert_eq!(rows[1][3], "true");
}

#[test]
fn large_mu_flags_pi_over_two_directly() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(
        tmp.path(),
        "spectrum",
        &["--method", "large_mu", "--grid", "d_points=1", "--grid", "kappa_min=1.5707963267948966", "--grid", "kappa_max=1.5707963267948966", "--grid", "kappa_points=1"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&tmp.path().join("spectrum.csv"));
    assert_eq!(rows[0][2..], ["inf".to_string(), "true".to_string()]);
}

#[test]
fn both_methods_write_two_files() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), "spectrum", &["--method", "both", "--grid", "d_points=3", "--grid", "kappa_points=4"]);
    assert_eq!(code(&out), 0);
    let a = data_rows(&tmp.path().join("spectrum_analytic.csv"));
    let s = data_rows(&tmp.path().join("spectrum_scattering.csv"));
    assert_eq!(a.len(), 12);
    for (x, y) in a.iter().zip(&s) {
        let (ra, rs): (f64, f64) = (x[2].parse().unwrap(), y[2].parse().unwrap());
        assert!((ra - rs).abs() < 0.01);
    }
}

#[test]
fn identical_configs_give_identical_files() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "c.toml", "method = \"both\"\n[dimensionless]\nbig_m = 50\nkappa = 1.2\n[grid]\nd_points = 9\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = run_in(dir, "spectrum", &["--config", cfg.to_str().unwrap(), "--jobs", "3"]);
        assert_eq!(code(&out), 0);
    }
    let (ra, rb) = (json(&a.join("run_record.json")), json(&b.join("run_record.json")));
    assert_eq!(ra["config_sha256"], rb["config_sha256"]);
    assert_eq!(ra["files"], rb["files"]);
    assert_eq!(ra["files"].as_array().unwrap().len(), 4);
    for f in ["spectrum_analytic.csv", "spectrum_scattering.csv", "spectrum_summary.json", "config.toml"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn written_config_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    let first = tmp.path().join("first");
    assert_eq!(code(&run_in(&first, "spectrum", &["--grid", "d_points=5"])), 0);
    let second = tmp.path().join("second");
    let saved = first.join("config.toml");
    assert_eq!(code(&run_in(&second, "spectrum", &["--config", saved.to_str().unwrap()])), 0);
    assert_eq!(fs::read(first.join("spectrum.csv")).unwrap(), fs::read(second.join("spectrum.csv")).unwrap());
}

#[test]
fn config_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        ("[dimensionless]\nbig_m = 10\nkappa = 1\nkapa = 2\n", "kapa"),
        ("[dimensionless]\nbig_m = 10\nkappa = 1\n[physical]\ng0 = 1\nmu = 100\na = 1e-6\n", "exactly one"),
        ("[grid]\nd_points = 3\n", "no parameter block"),
        ("[physical]\ng0 = 2e4\na = 3e-6\n", "velocity"),
        ("mode = \"pairs\"\n[dimensionless]\nbig_m = 10\nkappa = 1\n", "mode"),
        ("[dimensionless]\nbig_m = 10\nkappa = 1\n[grid]\nkappa_points = 0\n", "grid.kappa_points"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let cfg = write_config(&tmp, &format!("bad{i}.toml"), text);
        let out = run_in(&tmp.path().join("out"), "spectrum", &["--config", cfg.to_str().unwrap()]);
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(code(&out), 1, "case {i}: {err}");
        assert!(err.contains(needle), "case {i}: {err}");
    }
    let out = run_in(tmp.path(), "spectrum", &["--grid", "d_pts=3"]);
    assert_eq!(code(&out), 1);
    let out = run_in(tmp.path(), "spectrum", &["--config", "/nonexistent/c.toml"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn unknown_key_error_names_the_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "c.toml", "[dimensionless]\nbig_m = 10\nkappa = 1\n\n[grid]\nd_point = 3\n");
    let out = run_in(tmp.path(), "spectrum", &["--config", cfg.to_str().unwrap()]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 6") && err.contains("d_point"), "{err}");
}

#[test]
fn compare_passes_at_m_100_and_reports_the_table() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), "compare", &["--grid", "d_points=13", "--grid", "kappa_max=1.3", "--grid", "kappa_points=14"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&tmp.path().join("compare.json"));
    assert_eq!(rep["pass"], true);
    assert!(rep["primary"]["max_abs"].as_f64().unwrap() <= 0.01);
    assert_eq!(rep["monotone"], true);
    let table = data_rows(&tmp.path().join("compare_table.csv"));
    assert_eq!(table.len(), 4);
    let m10: f64 = table[0][1].parse().unwrap();
    assert!(m10 > 0.01, "M = 10 should differ more: {m10}");
}

#[test]
fn compare_tolerance_failure_exits_three() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "c.toml", "[dimensionless]\nbig_m = 10\nkappa = 1\n[compare]\ntolerance = 1e-6\nm_table = [10.0]\n");
    let out = run_in(&tmp.path().join("o"), "compare", &["--config", cfg.to_str().unwrap(), "--grid", "d_points=4", "--grid", "kappa_points=4"]);
    assert_eq!(code(&out), 3);
    let record = json(&tmp.path().join("o/run_record.json"));
    assert!(record["status"].as_str().unwrap().starts_with("tolerance failure"));
}

#[test]
fn threshold_found_and_none_in_range() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(&tmp.path().join("a"), "threshold", &["--method", "both"]);
    assert_eq!(code(&out), 0);
    let rep = json(&tmp.path().join("a/threshold.json"));
    let entries = rep["entries"].as_array().unwrap();
    let dev = |i: usize| entries[i]["crossings"][0]["deviation"].as_f64().unwrap().abs();
    assert_eq!(entries[0]["model"], "analytic");
    assert!(dev(0) < 1e-3);
    assert!(dev(1) < 1e-9);

    let cfg = write_config(&tmp, "c.toml", "[dimensionless]\nbig_m = 100\nkappa = 1\n[threshold]\nkappa_max = 1.0\n");
    let out = run_in(&tmp.path().join("b"), "threshold", &["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let rep = json(&tmp.path().join("b/threshold.json"));
    assert_eq!(rep["entries"][0]["status"], "none in range");
    assert_eq!(rep["entries"][0]["crossings"].as_array().unwrap().len(), 0);

    let out = run_in(&tmp.path().join("c"), "threshold", &["--method", "scattering"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn physical_block_reports_validity_and_flux() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "c.toml",
        "[physical]\ng0 = 2.0e4\nvelocity = 0.09\na = 3.0e-6\ngamma = 200.0\n[grid]\nd_points = 61\n",
    );
    let out = run_in(tmp.path(), "spectrum", &["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let record = json(&tmp.path().join("run_record.json"));
    let v = &record["validity"];
    assert!((v["kappa"].as_f64().unwrap() - 1.33).abs() < 0.01);
    assert_eq!(v["physical"]["steady_output_ok"], true);
    assert_eq!(v["below_threshold"], true);
    let s = json(&tmp.path().join("spectrum_summary.json"));
    let flux = s["flux"]["atoms_per_second"].as_f64().unwrap();
    let scaled = s["flux"]["flux_in_g0_units"].as_f64().unwrap() * 2.0e4;
    assert!((flux - scaled).abs() <= 1e-9 * flux);
}

#[test]
fn pairs_symmetric_run_is_a_bell_state() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "c.toml",
        "[dimensionless]\nbig_m = 100\nkappa = 1\n[pairs]\nasymmetries = [0.0, 0.5]\nbig_m = 4.0\nlength = 32.0\nn_points = 256\nt0 = 2.5\ndensity_stride = 8\n",
    );
    let out = run_in(tmp.path(), "pairs", &["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&tmp.path().join("pairs.csv"));
    let fidelity: f64 = rows[0][1].parse().unwrap();
    assert!(fidelity >= 0.999, "{fidelity}");
    let density = data_rows(&tmp.path().join("pair_density_0.csv"));
    assert_eq!(density.len(), 32 * 32);
    let rep = json(&tmp.path().join("pairs.json"));
    assert_eq!(rep["decreasing"]["chsh"], true);
    assert_eq!(rep["runs"][1]["density_file"], "pair_density_1.csv");
}

#[test]
fn pair_solver_error_exits_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "c.toml",
        "[dimensionless]\nbig_m = 100\nkappa = 1\n[pairs]\nbig_m = 4.0\nlength = 32.0\nn_points = 256\nt0 = 2.5\ng_peak = 20.0\n",
    );
    let out = run_in(tmp.path(), "pairs", &["--config", cfg.to_str().unwrap()]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(code(&out), 2, "{err}");
    assert!(err.contains("first order"), "{err}");
}

#[test]
fn dynamics_slow_ramp_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "c.toml", "[dimensionless]\nbig_m = 100\nkappa = 1\n[dynamics]\ngammas = [0.01]\n");
    let out = run_in(tmp.path(), "dynamics", &["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(&tmp.path().join("dynamics.json"));
    let c = &rep["comparison"];
    assert_eq!(c["within_tolerance"], true);
    assert!(c["error_vs_analytic"].as_f64().unwrap().abs() < 0.05);
    assert_eq!(data_rows(&tmp.path().join("dynamics.csv")).len(), 1);
}

#[test]
fn dynamics_fast_ramp_is_a_tolerance_failure() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(&tmp, "c.toml", "[dimensionless]\nbig_m = 100\nkappa = 1\n[dynamics]\ngammas = [0.3]\n");
    let out = run_in(tmp.path(), "dynamics", &["--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&tmp.path().join("dynamics.json"))["comparison"]["within_tolerance"], false);
    let record = json(&tmp.path().join("run_record.json"));
    assert!(record["status"].as_str().unwrap().starts_with("tolerance failure"));
}
