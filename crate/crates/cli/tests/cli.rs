//! End-to-end tests of the command-line binary: output files, formats,
//! determinism, and the exit-code contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mobius-vortex"))
        .args(args)
        .args(["--out", dir.to_str().unwrap()])
        .output()
        .expect("binary runs")
}

fn assert_code(out: &Output, want: i32) {
    assert_eq!(
        out.status.code(),
        Some(want),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_file(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn read_json(dir: &Path, name: &str) -> Value {
    let text = fs::read_to_string(dir.join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Mirror pair used by several tests: strengths (1, −1) at equal height.
const PAIR: &str = r#"{"vortices":[
  {"x": 0.35, "y": -0.4, "gamma": 1.0, "label": "a"},
  {"x": 2.791592653589793, "y": -0.4, "gamma": -1.0, "label": "b"}
]}"#;

#[test]
fn simulate_writes_the_expected_csv_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let sys = write_file(tmp.path(), "sys.json", PAIR);
    let out = run_in(
        tmp.path(),
        &[
            "simulate",
            "--system",
            sys.to_str().unwrap(),
            "--t-end",
            "2",
            "--sample-dt",
            "0.25",
        ],
    );
    assert_code(&out, 0);

    let traj = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next(), Some("t,label,x,y,gamma"));
    // 9 samples × 2 vortices data rows, all parseable.
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9 * 2);
    for row in &rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 5);
        cells[2].parse::<f64>().unwrap();
        cells[3].parse::<f64>().unwrap();
    }
    assert!(traj.ends_with('\n') && !traj.contains('\r'));

    let flips = fs::read_to_string(tmp.path().join("flips.csv")).unwrap();
    assert!(flips.starts_with("t,label\n"));

    let diag = read_json(tmp.path(), "diagnostics.json");
    assert!(diag["diagnostics"]["accepted_steps"].as_u64().unwrap() > 0);
    assert!(diag["diagnostics"]["max_energy_drift_rel"].as_f64().unwrap() < 1e-8);
    assert_eq!(diag["config"]["t_end"].as_f64(), Some(2.0));

    let final_state = read_json(tmp.path(), "final_state.json");
    assert_eq!(final_state["vortices"].as_array().unwrap().len(), 2);
}

#[test]
fn identical_configs_produce_byte_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let sys = write_file(tmp.path(), "sys.json", PAIR);
    let dir_a = tmp.path().join("a");
    let dir_b = tmp.path().join("b");
    for dir in [&dir_a, &dir_b] {
        fs::create_dir(dir).unwrap();
        let out = run_in(
            dir,
            &["simulate", "--system", sys.to_str().unwrap(), "--t-end", "3"],
        );
        assert_code(&out, 0);
    }
    for name in ["trajectory.csv", "flips.csv", "diagnostics.json", "final_state.json"] {
        assert_eq!(
            fs::read(dir_a.join(name)).unwrap(),
            fs::read(dir_b.join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
}

#[test]
fn final_state_round_trips_as_simulate_input() {
    let tmp = tempfile::tempdir().unwrap();
    let sys = write_file(tmp.path(), "sys.json", PAIR);
    let out = run_in(
        tmp.path(),
        &["simulate", "--system", sys.to_str().unwrap(), "--t-end", "1"],
    );
    assert_code(&out, 0);
    let final_path = tmp.path().join("final_state.json");
    let out = run_in(
        tmp.path(),
        &[
            "simulate",
            "--system",
            final_path.to_str().unwrap(),
            "--t-end",
            "1",
        ],
    );
    assert_code(&out, 0);
}

#[test]
fn json_format_replaces_the_csv_table() {
    let tmp = tempfile::tempdir().unwrap();
    let sys = write_file(tmp.path(), "sys.json", PAIR);
    let out = run_in(
        tmp.path(),
        &[
            "simulate",
            "--system",
            sys.to_str().unwrap(),
            "--t-end",
            "1",
            "--format",
            "json",
        ],
    );
    assert_code(&out, 0);
    assert!(!tmp.path().join("trajectory.csv").exists());
    let traj = read_json(tmp.path(), "trajectory.json");
    let samples = traj["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 11);
    assert_eq!(samples[0]["vortices"][0]["label"].as_str(), Some("a"));
}

#[test]
fn missing_input_file_exits_with_io_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["simulate", "--system", "/nonexistent/sys.json"],
    );
    assert_code(&out, 5);
}

#[test]
fn malformed_and_invalid_systems_exit_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let garbage = write_file(tmp.path(), "garbage.json", "not json at all");
    let out = run_in(tmp.path(), &["simulate", "--system", garbage.to_str().unwrap()]);
    assert_code(&out, 2);

    let zero = write_file(
        tmp.path(),
        "zero.json",
        r#"{"vortices":[{"x":0.1,"y":0.2,"gamma":0.0,"label":"a"}]}"#,
    );
    let out = run_in(tmp.path(), &["simulate", "--system", zero.to_str().unwrap()]);
    assert_code(&out, 2);
}

#[test]
fn coincident_vortices_exit_with_collision_code() {
    let tmp = tempfile::tempdir().unwrap();
    let sys = write_file(
        tmp.path(),
        "sys.json",
        r#"{"vortices":[
          {"x": 1.0, "y": 0.5, "gamma": 1.0, "label": "a"},
          {"x": 1.0, "y": 0.5, "gamma": 2.0, "label": "b"}
        ]}"#,
    );
    let out = run_in(tmp.path(), &["simulate", "--system", sys.to_str().unwrap()]);
    assert_code(&out, 3);
}

#[test]
fn domain_and_convergence_failures_use_their_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();

    // Equal strengths admit no fixed pair: domain error.
    let out = run_in(tmp.path(), &["equilibria", "fixed", "--g1", "1", "--g2", "1"]);
    assert_code(&out, 2);

    // A starved Newton solve reports a convergence failure.
    let out = run_in(
        tmp.path(),
        &[
            "equilibria",
            "equatorial",
            "--strengths",
            "2,-1,1",
            "--max-iterations",
            "1",
        ],
    );
    assert_code(&out, 4);

    // An orbit that cannot close before t_max reports the same class.
    let out = run_in(
        tmp.path(),
        &[
            "reduced", "orbit", "--g1", "3", "--g2", "1", "--c", "1", "--dx", "0",
            "--y1", "3", "--t-max", "1",
        ],
    );
    assert_code(&out, 4);
}

#[test]
fn negative_values_parse_in_space_separated_form() {
    let tmp = tempfile::tempdir().unwrap();
    // The impulse of the closed-form (2, 1) equilibrium is negative.
    let out = run_in(
        tmp.path(),
        &[
            "reduced", "critical", "--g1", "2", "--g2", "1", "--c",
            "-0.15013165116103178",
        ],
    );
    assert_code(&out, 0);
    // Strength vectors and ranges may lead with a minus sign too.
    let out = run_in(
        tmp.path(),
        &["equilibria", "equatorial", "--strengths", "-1,1,-1"],
    );
    assert_code(&out, 0);
    let sys = write_file(tmp.path(), "sys.json", PAIR);
    let out = run_in(
        tmp.path(),
        &[
            "streamfield", "--system", sys.to_str().unwrap(), "--grid", "8x6",
            "--y-range", "-1:1",
        ],
    );
    assert_code(&out, 0);
}

#[test]
fn fixed_equilibria_json_carries_the_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["equilibria", "fixed", "--g1", "2", "--g2", "1"]);
    assert_code(&out, 0);
    let doc = read_json(tmp.path(), "fixed_equilibria.json");
    let branches = doc["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 2);
    let y1 = branches[0]["branch"]["y1"].as_f64().unwrap();
    assert!((y1 - 1.1350643679507526).abs() < 1e-12);
    assert_eq!(branches[0]["verdict"]["kind"].as_str(), Some("Fixed"));
}

#[test]
fn ring_command_confirms_rigid_drift() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["equilibria", "nring", "--n", "4", "--y", "0.7"],
    );
    assert_code(&out, 0);
    let doc = read_json(tmp.path(), "nring.json");
    assert_eq!(doc["verdict"]["kind"].as_str(), Some("Relative"));
    let drift = doc["drift_analytic"].as_f64().unwrap();
    let measured = doc["verdict"]["drift_velocity"].as_f64().unwrap();
    assert!((drift - measured).abs() < 1e-10);
    assert_eq!(doc["system"]["vortices"].as_array().unwrap().len(), 4);
}

#[test]
fn orbit_command_classifies_the_zero_impulse_loop() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &[
            "reduced", "orbit", "--g1", "2", "--g2", "1", "--c", "0", "--dx", "0.35",
            "--y1", "0.3",
        ],
    );
    assert_code(&out, 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("orbit type I:"));
    let doc = read_json(tmp.path(), "orbit.json");
    assert_eq!(doc["report"]["orbit_type"].as_str(), Some("I"));
    let period = doc["report"]["period"].as_f64().unwrap();
    assert!((period - 11.344594617403).abs() < 1e-6);
    let trace = fs::read_to_string(tmp.path().join("orbit_trace.csv")).unwrap();
    assert!(trace.starts_with("t,dx,y1\n"));
    assert!(trace.lines().count() >= 513);
}

#[test]
fn portrait_scan_writes_grid_and_reports_structure() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &[
            "reduced", "scan", "--g1", "2", "--g2", "1", "--c", "1", "--grid", "40x30",
        ],
    );
    assert_code(&out, 0);
    let csv = fs::read_to_string(tmp.path().join("portrait.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 40 * 30);
    assert!(csv.starts_with("dx,y1,h\n"));
    let meta = read_json(tmp.path(), "portrait.json");
    assert_eq!(meta["values_file"].as_str(), Some("portrait.csv"));
    assert_eq!(meta["report"]["singular"].as_array().unwrap().len(), 2);
    assert_eq!(meta["grid"]["nx"].as_u64(), Some(40));
}

#[test]
fn streamfield_covers_every_grid_node() {
    let tmp = tempfile::tempdir().unwrap();
    let sys = write_file(tmp.path(), "sys.json", PAIR);
    let out = run_in(
        tmp.path(),
        &[
            "streamfield",
            "--system",
            sys.to_str().unwrap(),
            "--grid",
            "20x10",
        ],
    );
    assert_code(&out, 0);
    let csv = fs::read_to_string(tmp.path().join("streamfield.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 20 * 10);
    assert!(csv.starts_with("x,y,psi\n"));
    let meta = read_json(tmp.path(), "streamfield.json");
    assert_eq!(meta["grid"]["nx"].as_u64(), Some(20));
    assert_eq!(meta["grid"]["ny"].as_u64(), Some(10));
    assert!(meta.get("values").is_none());
}

#[test]
fn verify_suite_passes_and_records_a_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["verify", "--systems", "4", "--t-end", "10"],
    );
    assert_code(&out, 0);
    let report = read_json(tmp.path(), "verify.json");
    assert_eq!(report["failed"].as_u64(), Some(0));
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 13);
    assert!(checks.iter().all(|c| c["passed"].as_bool() == Some(true)));
}
