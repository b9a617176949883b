use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spinstat"));
    c.env_remove("SPINSTAT_THREADS");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

const PLAIN: &str = "[state]\nmass = 0.5\ntemperature = 0.2\nmu = 0.1\n";
const VORTEX: &str = "[vortex]\nT0 = 0.15\nOmega0 = 0.015\nmass = 1.115683\n";

#[test]
fn currents_without_spin_potential() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "plain.toml", PLAIN);
    let o = run(&["currents", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    for k in ["config", "state", "zeta", "currents", "errors"] {
        assert!(keys.contains(&k), "missing {k}");
    }
    for k in ["N", "T", "S", "Ncal", "S_entropy", "chi"] {
        assert!(v["currents"].get(k).is_some(), "missing currents.{k}");
    }
    let s = v["currents"]["S"].as_array().unwrap();
    assert!(s
        .iter()
        .flat_map(|r| r.as_array().unwrap())
        .all(|x| x.as_f64() == Some(0.0)));
    assert!(v["currents"]["N"][0].as_f64().unwrap() > 0.0);
}

#[test]
fn vortex_polarization_follows_rotation() {
    let dir = tempfile::tempdir().unwrap();
    for (omega, sign) in [(0.015, 1.0), (-0.015, -1.0)] {
        let cfg = write(dir.path(), "v.toml", &VORTEX.replace("0.015", &omega.to_string()));
        let o = run(&["currents", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        let p = json(&o)["polarization"].clone();
        let pz = p[2].as_f64().unwrap();
        assert!(pz * sign > 0.0, "{p}");
        assert_eq!(p[0].as_f64(), Some(0.0));
    }
}

#[test]
fn malformed_config_names_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[state]\nmass = 0.5\ntemperature = \"hot\"\n");
    let o = run(&["currents", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("temperature"), "{err}");

    let cfg = write(dir.path(), "typo.toml", "[state]\nmass = 0.5\ntemprature = 0.2\n");
    let o = run(&["currents", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("temprature"));

    let cfg = write(
        dir.path(),
        "fast.toml",
        "[state]\nmass = 0.5\ntemperature = 0.2\nvelocity = [0.8, 0.7, 0.0]\n",
    );
    assert_eq!(code(&run(&["currents", "--config", cfg.to_str().unwrap()])), 1);

    assert_eq!(code(&run(&["currents"])), 1);
    assert_eq!(code(&run(&["currents", "--config", "/nonexistent/x.toml"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
}

#[test]
fn inadmissible_state_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "fast.toml",
        "[vortex]\nT0 = 0.15\nOmega0 = 3.0\nmass = 1.0\n",
    );
    let o = run(&["currents", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("selection criterion"));
    assert!(o.stdout.is_empty());
}

#[test]
fn unconverged_quadrature_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "tight.toml",
        &format!("{PLAIN}[quadrature]\nn_radial = 8\nn_theta = 4\nn_phi = 4\nrel_tol = 1e-15\nmax_refinements = 1\n"),
    );
    let o = run(&["currents", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_single_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "plain.toml", PLAIN);
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--check", "euler"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["name"], "euler");
    assert_eq!(v["config"]["verify"]["checks"], serde_json::json!(["euler"]));

    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--check", "euler,nonsense"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn verify_all_checks_pass_on_default_quadrature() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "spin.toml",
        "[state]\nmass = 0.938\ntemperature = 0.15\nmu = 0.05\nvelocity = [0.2, 0.0, 0.1]\n[state.omega]\ne = [0.02, 0.0, 0.0]\nb = [0.0, 0.05, 0.1]\n",
    );
    let o = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    assert!(v["reports"].as_array().unwrap().len() >= 5);
}

#[test]
fn verify_with_coarse_steps_fails_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "coarse.toml",
        &format!("{PLAIN}[state.omega]\nb = [0.0, 0.0, 0.2]\n[verify]\nchecks = [\"gibbs_duhem\"]\nh_xi = 0.5\n"),
    );
    let o = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL gibbs_duhem"));
    assert_eq!(json(&o)["passed"], false);
}

fn csv_rows(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn vortex_scan_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "scan.toml",
        &format!(
            "{}[scan]\nparameter = \"Omega0_over_T0\"\nlo = 0.0\nhi = 0.3\nsteps = 7\n",
            VORTEX
        ),
    );
    let o = run(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (header, rows) = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 7);
    assert_eq!(header[0], "Omega0_over_T0");
    let pz = column(&header, &rows, "P_z");
    assert_eq!(pz[0], 0.0);
    assert!(pz.windows(2).all(|w| w[1] > w[0]), "{pz:?}");
}

#[test]
fn temperature_scan_raises_density() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "scan.toml",
        &format!("{PLAIN}[scan]\nparameter = \"T\"\nlo = 0.1\nhi = 0.3\nsteps = 4\n"),
    );
    let o = run(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (header, rows) = csv_rows(&o.stdout);
    let n0 = column(&header, &rows, "N^0");
    assert!(n0.windows(2).all(|w| w[1] > w[0]), "{n0:?}");
}

#[test]
fn two_step_scan_and_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "scan.toml",
        &format!("{PLAIN}[scan]\nparameter = \"mu\"\nlo = 0.0\nhi = 0.1\nsteps = 2\n"),
    );
    let o = run(&["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);

    let o = run(&["scan", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["rows"].as_array().unwrap().len(), 2);

    let bad = write(
        dir.path(),
        "one.toml",
        &format!("{PLAIN}[scan]\nparameter = \"mu\"\nlo = 0.0\nhi = 0.1\nsteps = 1\n"),
    );
    assert_eq!(code(&run(&["scan", "--config", bad.to_str().unwrap()])), 1);
}

#[test]
fn scan_marks_inadmissible_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "scan.toml",
        &format!("{VORTEX}[scan]\nparameter = \"omega_scale\"\nlo = 1.0\nhi = 300.0\nsteps = 3\n"),
    );
    let out = dir.path().join("scan.csv");
    let o = run(&[
        "scan",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);
    let (header, rows) = csv_rows(&std::fs::read(&out).unwrap());
    assert_eq!(rows.len(), 3);
    let status = header.iter().position(|h| h == "status").unwrap();
    assert_eq!(rows[0][status], "ok");
    assert_eq!(rows[2][status], "skipped");
    assert!(rows[2].last().unwrap().contains("selection criterion"));
}

#[test]
fn oracle_is_seeded() {
    let a = run(&["oracle", "--seed", "7", "--trials", "100"]);
    let b = run(&["oracle", "--seed", "7", "--trials", "100"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["trials"], 100);
    assert!(v["spin_density"]["max"].as_f64().unwrap() < 1e-10);
    let c = run(&["oracle", "--seed", "8", "--trials", "100"]);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(code(&run(&["oracle", "--trials", "0"])), 1);
}

#[test]
fn config_echo_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "spin.toml",
        "[state]\nmass = 0.3\ntemperature = 0.17\nmu = -0.02\nvelocity = [0.1, -0.3, 0.2]\n[state.omega]\ne = [0.03, 0.0, -0.01]\nb = [0.1, 0.2, 0.0]\n[quadrature]\nn_radial = 32\n",
    );
    let first = json(&run(&["currents", "--config", cfg.to_str().unwrap()]));
    let echo = write(dir.path(), "echo.json", &first["config"].to_string());
    let second = json(&run(&["currents", "--config", echo.to_str().unwrap()]));
    assert_eq!(first["currents"], second["currents"]);
    assert_eq!(first["config"], second["config"]);
}

#[test]
fn threads_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "plain.toml", PLAIN);
    let out = dir.path().join("nested.json");
    let o = bin()
        .args([
            "currents",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            "2",
        ])
        .env("SPINSTAT_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let written: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let single = json(&run(&["currents", "--config", cfg.to_str().unwrap(), "--threads", "1"]));
    assert_eq!(written["currents"], single["currents"]);

    let o = bin()
        .args(["currents", "--config", cfg.to_str().unwrap()])
        .env("SPINSTAT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert_eq!(
        code(&run(&["currents", "--config", cfg.to_str().unwrap(), "--threads", "0"])),
        1
    );

    let o = run(&["currents", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    let (header, rows) = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 1);
    assert!(header.contains(&"S^0,12".to_string()));
}
