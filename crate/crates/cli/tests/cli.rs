use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn iqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iqc")).args(args).output().expect("spawn iqc")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("experiment.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

const SMALL: &str = r#"
seed = 3
[grid]
l = [1.0]
pairs = [[0, 0]]
"#;

#[test]
fn analyze_writes_one_row_per_point() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let o = iqc(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let text = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "L,nu,nutilde,mode,gamma,status,iters,solve_ms");
    let rows = read_rows(&out.join("results.csv"));
    assert_eq!(rows.len(), 2);
    let modes: Vec<&str> = rows.iter().map(|r| r[3].as_str()).collect();
    assert_eq!(modes, ["terminal", "hard"]);
    for r in &rows {
        assert_eq!(r[5], "optimal");
        let g: f64 = r[4].parse().unwrap();
        assert!(g.is_finite() && g > 0.0);
    }
    assert!(!out.join("plot.csv").exists());
}

#[test]
fn analyze_is_deterministic_apart_from_timing() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let o = iqc(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", "2"]);
        assert_eq!(code(&o), 0);
        read_rows(&out.join("results.csv"))
            .into_iter()
            .map(|mut r| {
                r.pop();
                r
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn static_mode_collapses_to_one_point_per_l() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[grid]\nl = [1.0, 2.0]\npairs = [[1, 1], [2, 2]]\n");
    let out = tmp.path().join("out");
    let o = iqc(&["analyze", "--config", &cfg, "--out", out.to_str().unwrap(), "--mode", "static"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rows(&out.join("results.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[1] == "0" && r[2] == "0" && r[3] == "static"));
    // the static multiplier cannot certify L = 2
    assert_eq!(rows[1][4], "inf");
    assert_eq!(rows[1][5], "infeasible");
}

#[test]
fn sweep_without_config_covers_the_benchmark_grid() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("sweep");
    let o = iqc(&["sweep", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_rows(&out.join("results.csv")).len(), 288);
    assert_eq!(read_rows(&out.join("plot.csv")).len(), 288);
    let svg = fs::read_to_string(out.join("plot.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("gamma*"));
}

#[test]
fn ragged_inline_plant_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"
[plant]
kind = "inline"
a = [[0.5, 0.0], [0.0]]
b = [[1.0], [0.0]]
c = [[1.0, 0.0]]
d = [[0.0]]
ce = [[1.0, 0.0]]
"#,
    );
    let o = iqc(&["analyze", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("plant block `a`"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "sed = 1\n");
    let o = iqc(&["analyze", "--config", &cfg]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_config_file_is_reported() {
    let o = iqc(&["analyze", "--config", "/nonexistent/experiment.toml"]);
    assert_ne!(code(&o), 0);
}

#[test]
fn verify_runs_named_suites() {
    let tmp = TempDir::new().unwrap();
    let o = iqc(&["verify", "lifting", "interconnection", "--seed", "5", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("verify.json")).unwrap()).unwrap();
    let reports = json.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| r["pass"] == true));
    assert_eq!(reports[0]["suite"], "lifting");
}

#[test]
fn verify_multiplier_suites_pass() {
    let tmp = TempDir::new().unwrap();
    let o = iqc(&["verify", "hyperdominance-propagation", "iqc-terminal", "kyp-fdi", "--seed", "1", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn verify_rejects_unknown_suite() {
    let tmp = TempDir::new().unwrap();
    let o = iqc(&["verify", "no-such-suite", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!tmp.path().join("verify.json").exists());
}

const SIM: &str = r#"
seed = 11
[simulate]
l = 1.0
horizon = 500
x0 = [1.0, 0.0, 0.0, 0.0, 0.0]
f = { kind = "quadratic", q = [[0.1]] }
"#;

#[test]
fn simulate_writes_the_trajectory() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SIM);
    let o = iqc(&["simulate", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rows(&tmp.path().join("trajectory.csv"));
    assert_eq!(rows.len(), 500);
    assert!(String::from_utf8_lossy(&o.stdout).contains("ratio="));
}

#[test]
fn simulate_draws_a_seeded_initial_state() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &SIM.replace("x0 = [1.0, 0.0, 0.0, 0.0, 0.0]\n", ""));
    let run = |name: &str, seed: &str| {
        let out = tmp.path().join(name);
        let o = iqc(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", seed]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out.join("trajectory.csv")).unwrap()
    };
    assert_eq!(run("a", "1"), run("b", "1"));
    assert_ne!(run("a", "1"), run("c", "2"));
}

#[test]
fn simulate_checks_the_amplitude_bound() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SIM);
    let dir = tmp.path().to_str().unwrap();
    let loose = iqc(&["simulate", "--config", &cfg, "--out", dir, "--gamma", "1e6"]);
    assert_eq!(code(&loose), 0);
    assert!(String::from_utf8_lossy(&loose.stdout).contains("pass"));
    let tight = iqc(&["simulate", "--config", &cfg, "--out", dir, "--gamma", "1e-6"]);
    assert_eq!(code(&tight), 4);
}

#[test]
fn simulate_with_zero_horizon_writes_header_only() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &SIM.replace("horizon = 500", "horizon = 0"));
    let o = iqc(&["simulate", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read_rows(&tmp.path().join("trajectory.csv")).is_empty());
}

#[test]
fn simulate_rejects_wrong_initial_state_length() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &SIM.replace("x0 = [1.0, 0.0, 0.0, 0.0, 0.0]", "x0 = [1.0, 0.0]"));
    let o = iqc(&["simulate", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("simulate.x0 has 2 entries"));
}

#[test]
fn dump_lmi_writes_one_file_per_point() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[grid]\nl = [1.0]\npairs = [[1, 1]]\nmodes = [\"terminal\"]\n");
    let o = iqc(&["dump-lmi", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let files: Vec<_> = fs::read_dir(tmp.path().join("lmi")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(files.len(), 1);
    assert_eq!(files[0].to_string_lossy(), "L1_nu1_nutilde1_terminal.lmi");
    let text = fs::read_to_string(tmp.path().join("lmi").join(&files[0])).unwrap();
    assert!(!text.is_empty());
}
