//! End-to-end tests of the `eit` binary: scenario execution, sweep handling,
//! output formats, exit codes, and the verification suites.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eit"))
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|v| v.parse::<f64>().unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let idx = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    rows.iter().map(|r| r[idx]).collect()
}

const SPECTRUM_SWEEP: &str = r#"{
  "name": "three-level window",
  "system": {
    "scheme": "three-level",
    "drives": [
      { "label": "a", "rabi": 0.01, "detuning": 0.0 },
      { "label": "b", "rabi": 0.5, "detuning": 0.0 }
    ],
    "decoherence": { "depop": { "2": 2.0 } }
  },
  "task": { "kind": "spectrum", "axis": { "start": -4.0, "stop": 4.0, "count": 81 } },
  "sweep": { "parameter": "system.drives.1.rabi", "values": [0.0, 0.5, 1.0, 2.0] },
  "output": { "format": "csv", "path": "OUTPATH" }
}"#;

#[test]
fn spectrum_sweep_reproduces_curve_family() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("window.csv");
    let scenario = write_scenario(
        dir.path(),
        "s.json",
        &SPECTRUM_SWEEP.replace("OUTPATH", out_path.to_str().unwrap()),
    );
    run_ok(&["run", scenario.to_str().unwrap()]);
    let (header, rows) = read_table(&out_path);
    assert_eq!(
        header,
        [
            "sweep_index",
            "sweep_value",
            "nu_a",
            "chi_re",
            "chi_im",
            "eta",
            "kappa",
            "deta_dnu"
        ]
    );
    assert_eq!(rows.len(), 4 * 81);
    // Rows ordered by sweep index, then grid index.
    let sweep_idx = column(&header, &rows, "sweep_index");
    assert!(sweep_idx.windows(2).all(|w| w[0] <= w[1]));
    // Line-center absorption: full two-level value without the control field,
    // exactly zero with it (gamma_31 = 0).
    let kappa = column(&header, &rows, "kappa");
    let nu = column(&header, &rows, "nu_a");
    let center =
        |sweep: usize| kappa[sweep * 81 + nu[..81].iter().position(|&x| x == 0.0).unwrap()];
    assert!((center(0) - 1.0).abs() < 1e-12);
    for sweep in 1..4 {
        assert!(center(sweep).abs() < 1e-12);
    }
}

#[test]
fn identical_scenario_gives_byte_identical_output_modulo_run_line() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    let scenario = write_scenario(
        dir.path(),
        "s.json",
        &SPECTRUM_SWEEP.replace("OUTPATH", "unused.csv"),
    );
    run_ok(&[
        "run",
        scenario.to_str().unwrap(),
        "--output",
        out_a.to_str().unwrap(),
    ]);
    run_ok(&[
        "run",
        scenario.to_str().unwrap(),
        "--output",
        out_b.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    let strip = |p: &Path| {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# run:"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&out_a), strip(&out_b));
    // The sha256 manifest line is present and identical.
    let sha = |p: &Path| {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .find(|l| l.starts_with("# scenario-sha256:"))
            .unwrap()
            .to_string()
    };
    assert_eq!(sha(&out_a), sha(&out_b));
}

#[test]
fn steady_task_reports_lifetime_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("steady.csv");
    let body = r#"{
      "name": "two-level lifetime",
      "system": {
        "scheme": "two-level",
        "drives": [{ "label": "a", "rabi": 0.3, "detuning": 3.0 }],
        "decoherence": { "depop": { "2": 2.0 } }
      },
      "task": { "kind": "steady" }
    }"#;
    let scenario = write_scenario(dir.path(), "s.json", body);
    run_ok(&[
        "run",
        scenario.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    let (header, rows) = read_table(&out);
    let tau = column(&header, &rows, "tau_a")[0];
    assert!((tau - 55.5556).abs() < 1e-3);
    // Three- and four-level elements are not defined for this scheme.
    assert!(column(&header, &rows, "rho31_re")[0].is_nan());
    assert!(column(&header, &rows, "w10_re")[0].is_nan());
}

#[test]
fn kerr_overlap_error_is_complement() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("overlap.csv");
    let body = r#"{
      "name": "overlap",
      "system": {
        "scheme": "four-level",
        "drives": [
          { "label": "a", "rabi": 0.01, "detuning": 0.0 },
          { "label": "b", "rabi": 0.5, "detuning": 0.0, "occupancy": { "coherent": 1000.0 } },
          { "label": "c", "rabi": 0.05, "detuning": 5.0 }
        ],
        "decoherence": { "depop": { "2": 2.0, "4": 2.0 } }
      },
      "task": {
        "kind": "kerr-overlap",
        "n_a": 1, "n_c": 5, "phi": 3.141592653589793,
        "alpha_sq": { "start": 100.0, "stop": 100000.0, "points": 16 }
      }
    }"#;
    let scenario = write_scenario(dir.path(), "s.json", body);
    run_ok(&[
        "run",
        scenario.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    let (header, rows) = read_table(&out);
    assert_eq!(rows.len(), 16);
    let overlap = column(&header, &rows, "overlap");
    let error = column(&header, &rows, "error");
    for (o, e) in overlap.iter().zip(&error) {
        assert!((o + e - 1.0).abs() < 1e-12);
    }
    // Classical limit: last grid point is nearly coherent again.
    assert!(*overlap.last().unwrap() > 0.97);
    assert!(overlap[0] < 0.5);
}

#[test]
fn milestones_and_dressed_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("milestones.csv");
    let body = r#"{
      "name": "milestones",
      "system": {
        "scheme": "two-level",
        "drives": [{ "label": "a", "rabi": 0.25, "detuning": 0.0 }],
        "dual_rail": true
      },
      "task": { "kind": "milestones", "q_max": 3 }
    }"#;
    let scenario = write_scenario(dir.path(), "s.json", body);
    run_ok(&[
        "run",
        scenario.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    let (header, rows) = read_table(&out);
    assert_eq!(rows.len(), 3);
    let nu = column(&header, &rows, "nu_a");
    let t = column(&header, &rows, "t_q");
    assert_eq!(nu[0], 0.0);
    assert!((t[0] - std::f64::consts::PI / 0.25).abs() < 1e-12);
    assert!(nu[1] > 0.0 && t[1] > t[0]);

    let out = dir.path().join("dressed.csv");
    let body = r#"{
      "name": "dressed",
      "system": {
        "scheme": "three-level",
        "drives": [
          { "label": "a", "rabi": 3.0, "detuning": 0.0 },
          { "label": "b", "rabi": 4.0, "detuning": 0.0 }
        ]
      },
      "task": { "kind": "dressed" }
    }"#;
    let scenario = write_scenario(dir.path(), "d.json", body);
    run_ok(&[
        "run",
        scenario.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    let (header, rows) = read_table(&out);
    assert_eq!(column(&header, &rows, "splitting")[0], 5.0);
    assert_eq!(column(&header, &rows, "ev_lower")[0], -5.0);
    assert_eq!(column(&header, &rows, "ev_upper")[0], 5.0);
}

#[test]
fn evolve_task_emits_diagnostics_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("evolve.json");
    let body = r#"{
      "name": "dual-rail evolve",
      "system": {
        "scheme": "two-level",
        "drives": [{ "label": "a", "rabi": 0.1, "detuning": 2.0 }],
        "decoherence": { "depop": { "2": 2.0 } },
        "dual_rail": true
      },
      "task": {
        "kind": "evolve", "t_end": 10.0, "stride": 500,
        "initial_state": "dual-rail",
        "elements": [[0, 3], [1, 1]]
      },
      "output": { "format": "json", "path": "OUTPATH" }
    }"#
    .replace("OUTPATH", out.to_str().unwrap());
    let scenario = write_scenario(dir.path(), "s.json", &body);
    run_ok(&["run", scenario.to_str().unwrap()]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["manifest"]["scenario_name"], "dual-rail evolve");
    assert!(doc["manifest"]["scenario_sha256"].as_str().unwrap().len() == 64);
    let columns: Vec<String> = doc["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(
        columns,
        [
            "t",
            "rho_0_3_re",
            "rho_0_3_im",
            "rho_1_1_re",
            "rho_1_1_im",
            "trace_dev",
            "min_eig",
            "purity"
        ]
    );
    let rows = doc["rows"].as_array().unwrap();
    assert!(rows.len() > 10);
    let last = rows.last().unwrap().as_array().unwrap();
    assert_eq!(last[0].as_f64().unwrap(), 10.0);
    let trace_dev = last[5].as_f64().unwrap();
    assert!(trace_dev < 1e-10);
}

#[test]
fn validation_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    // Unknown field inside the system section.
    let body = r#"{
      "name": "bad",
      "system": {
        "scheme": "two-level",
        "drives": [{ "label": "a", "rabi": 0.1 }],
        "coupling": 3.0
      },
      "task": { "kind": "steady" }
    }"#;
    let scenario = write_scenario(dir.path(), "bad.json", body);
    let (code, stderr) = exit_code(&["run", scenario.to_str().unwrap(), "--output", "x.csv"]);
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(
        stderr.contains("coupling"),
        "stderr should name the field: {stderr}"
    );

    // Sweep path that does not exist.
    let body = r#"{
      "name": "bad sweep",
      "system": {
        "scheme": "two-level",
        "drives": [{ "label": "a", "rabi": 0.1 }]
      },
      "task": { "kind": "steady" },
      "sweep": { "parameter": "system.drives.0.rabbi", "values": [1.0, 2.0] }
    }"#;
    let scenario = write_scenario(dir.path(), "bad2.json", body);
    let (code, stderr) = exit_code(&["run", scenario.to_str().unwrap(), "--output", "x.csv"]);
    assert_eq!(code, 2);
    assert!(
        stderr.contains("rabbi"),
        "stderr should name the path: {stderr}"
    );
}

#[test]
fn numerical_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    // Exact dressed-state pole of the undamped three-level response.
    let body = r#"{
      "name": "singular",
      "system": {
        "scheme": "three-level",
        "drives": [
          { "label": "a", "rabi": 0.01, "detuning": 0.5 },
          { "label": "b", "rabi": 0.5, "detuning": 0.0 }
        ]
      },
      "task": { "kind": "steady" }
    }"#;
    let scenario = write_scenario(dir.path(), "s.json", body);
    let (code, stderr) = exit_code(&["run", scenario.to_str().unwrap(), "--output", "x.csv"]);
    assert_eq!(code, 3, "stderr: {stderr}");
    assert!(stderr.contains("singular"), "{stderr}");
}

#[test]
fn io_errors_exit_four() {
    let (code, stderr) = exit_code(&["run", "/nonexistent/scenario.json", "--output", "x.csv"]);
    assert_eq!(code, 4, "stderr: {stderr}");
}

#[test]
fn verify_suites_run_clean() {
    for suite in ["invariants", "paper-anchors", "oracle"] {
        let out = run_ok(&["verify", suite]);
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(
            stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 4,
            "{suite}: {stdout}"
        );
        assert!(!stdout.contains("FAIL"));
    }
    let (code, stderr) = exit_code(&["verify", "unknown-suite"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("unknown-suite"));
}

#[test]
fn help_documents_columns() {
    let out = run_ok(&["--help"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    for needle in [
        "kerr-overlap",
        "nu_a, chi_re, chi_im, eta, kappa, deta_dnu",
        "sweep_index",
    ] {
        assert!(stdout.contains(needle), "--help should mention {needle}");
    }
}

#[test]
fn missing_output_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{
      "name": "no output",
      "system": { "scheme": "two-level", "drives": [{ "label": "a", "rabi": 0.1 }] },
      "task": { "kind": "steady" }
    }"#;
    let scenario = write_scenario(dir.path(), "s.json", body);
    let (code, stderr) = exit_code(&["run", scenario.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("output"));
}
