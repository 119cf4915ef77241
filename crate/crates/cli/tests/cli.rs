use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lindblad-coms"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a two-TLS model (default preset plus `extra` flags) into `dir`.
fn two_tls(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let file = dir.path().join(name);
    let mut args = vec!["example", "two-tls", "--out", path(&file)];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    file
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let file = dir.path().join(name);
    std::fs::write(&file, text).unwrap();
    file
}

#[test]
fn decompose_interacting_example() {
    let dir = TempDir::new().unwrap();
    let model = two_tls(&dir, "m.json", &[]);
    let out = run(&["decompose", "--model", path(&model)]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out.stdout);
    // energy order: the mixed pair sits between the two product levels
    assert_eq!(report["blocks"], serde_json::json!([[1], [2, 3], [4]]));
    assert!(report["tolerances"]["hermiticity"].is_number());
    assert!(report["epsilon_s"].is_number());

    let fixture = json(&std::fs::read(dir.path().join("m.analytics.json")).unwrap());
    assert_eq!(fixture["psi_blocks"], serde_json::json!([[1], [2], [3, 4]]));
    assert_eq!(fixture["named_coms"].as_array().unwrap().len(), 2);
}

#[test]
fn non_interacting_example_has_three_named_coms() {
    let out = run(&["example", "two-tls", "--preset", "non-interacting"]);
    assert!(out.status.success());
    let v = json(&out.stdout);
    assert_eq!(v["analytics"]["blocks"], serde_json::json!([[1], [2], [3], [4]]));
    let names: Vec<&str> = v["analytics"]["named_coms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["excitation_number", "population_inversion", "energy"]);
}

#[test]
fn evolve_figure1_relaxes_to_thermal_mixed_block() {
    let dir = TempDir::new().unwrap();
    let model = two_tls(&dir, "m.json", &[]);
    let fixture = json(&std::fs::read(dir.path().join("m.analytics.json")).unwrap());
    // psi_3 and psi_4 positions in the energy-sorted basis
    let order: Vec<u64> = fixture["sorted_to_psi"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    let i3 = order.iter().position(|&p| p == 3).unwrap();
    let i4 = order.iter().position(|&p| p == 4).unwrap();
    let mut pops = [0.0; 4];
    pops[i3] = 0.7;
    pops[i4] = 0.3;
    let init = write(&dir, "init.json", &format!("{{\"populations\": {pops:?}}}"));
    let csv = dir.path().join("traj.csv");
    let out = run(&[
        "evolve", "--model", path(&model), "--initial", path(&init), "--t-max", "20",
        "--samples", "401", "--out", path(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&out.stdout);
    assert!(summary["distance_to_stationary"].as_f64().unwrap() < 1e-6);

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,p_1,p_2,p_3,p_4");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 401);
    let last = rows.last().unwrap();
    assert_eq!(last[0], 20.0);
    assert!((last[1 + i3] - 0.268941).abs() < 1e-4, "p_3 = {}", last[1 + i3]);
    for r in &rows {
        let total: f64 = r[1..].iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn evolve_writes_csv_to_stdout_and_summary_to_stderr() {
    let dir = TempDir::new().unwrap();
    let model = two_tls(&dir, "m.json", &[]);
    let out = run(&[
        "evolve", "--model", path(&model), "--t-max", "1", "--samples", "3", "--coherences",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("t,p_1,p_2,p_3,p_4,abs_rho_1_2,"));
    assert_eq!(stdout.lines().count(), 4);
    assert!(json(&out.stderr)["tolerances"]["rtol"].is_number());
}

#[test]
fn brute_force_atoms_match_partition() {
    let dir = TempDir::new().unwrap();
    let model = two_tls(&dir, "m.json", &[]);
    let out = run(&["coms", "--brute-force", "--model", path(&model)]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out.stdout);
    assert_eq!(report["brute_force"]["atoms_match_partition"], Value::Bool(true));
    assert_eq!(report["independent_count"], 2);
    assert!(report["tolerances"]["lindblad"].is_number());
}

#[test]
fn stationary_report_from_populations() {
    let dir = TempDir::new().unwrap();
    let model = two_tls(&dir, "m.json", &["--preset", "non-interacting"]);
    let init = write(&dir, "init.json", r#"{"populations": [0.1, 0.2, 0.3, 0.4]}"#);
    let out = run(&["stationary", "--model", path(&model), "--initial", path(&init)]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out.stdout);
    // singleton blocks: nothing moves
    assert_eq!(report["assembled_populations"], serde_json::json!([0.1, 0.2, 0.3, 0.4]));
    assert!(report["fixed_point_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let model = two_tls(&dir, "m.json", &[]);
    for cmd in ["decompose", "coms", "stationary", "verify"] {
        let a = run(&[cmd, "--model", path(&model)]);
        let b = run(&[cmd, "--model", path(&model)]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn verify_reports_every_failure_with_status_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        &dir,
        "bad.json",
        r#"{"hamiltonian": [[[0, 0], [1, 0]], [[0, 0], [1, 0]]],
            "coupling_operator": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]],
            "temperature": 1.0, "reservoir": {"family": "flat-kms", "g0": 1}}"#,
    );
    let out = run(&["verify", "--model", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out.stdout);
    assert_eq!(report["passed"], Value::Bool(false));
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == Value::Bool(false))
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["hamiltonian_hermitian", "coupling_hermitian"]);

    // the analysis commands refuse the same file
    assert_eq!(run(&["decompose", "--model", path(&bad)]).status.code(), Some(1));
}

#[test]
fn usage_and_io_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["decompose", "--model", path(&missing)]).status.code(), Some(2));
    let garbage = write(&dir, "garbage.json", "{ not json");
    assert_eq!(run(&["coms", "--model", path(&garbage)]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let model = two_tls(&dir, "m.json", &[]);
    assert_eq!(
        run(&["evolve", "--model", path(&model), "--t-max", "0"]).status.code(),
        Some(2)
    );
    let wrong = write(&dir, "init.json", r#"{"populations": [0.5, 0.5]}"#);
    assert_eq!(
        run(&["stationary", "--model", path(&model), "--initial", path(&wrong)]).status.code(),
        Some(2)
    );
}

#[test]
fn epsilon_s_override_is_reported() {
    let dir = TempDir::new().unwrap();
    let model = two_tls(&dir, "m.json", &[]);
    // a threshold above every coupling leaves only singletons
    let out = run(&["decompose", "--model", path(&model), "--epsilon-s", "100"]);
    let report = json(&out.stdout);
    assert_eq!(report["epsilon_s"], 100.0);
    assert_eq!(report["blocks"], serde_json::json!([[1], [2], [3], [4]]));
}
