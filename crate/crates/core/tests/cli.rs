use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use maser_sync::cli::{Provenance, RunConfig, SyncReport};
use maser_sync::model::SystemParams;
use maser_sync::sync::{closed_form_smax_refrigerator, Branch};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maser-sync"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stderr is not JSON: {text}"))
}

#[test]
fn sync_reports_refrigerator_branch() {
    let o = run(&["sync", "--n-deg", "3", "--bath-ratio", "0.4"]);
    assert_eq!(o.status.code(), Some(0));
    let report: SyncReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.result.branch, Branch::RefrigeratorCooperative);
    let closed =
        closed_form_smax_refrigerator(&SystemParams::reference(3).with_bath_ratio(0.4)).unwrap();
    assert!((report.result.s_max - closed).abs() < 1e-8 * closed);
    assert_eq!(report.closed_form_s_max, Some(closed));
}

#[test]
fn validate_passes() {
    let o = run(&["validate", "--validate-samples", "3"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.lines().count() >= 5);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn phase_grid_ridge_for_weak_dissipation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let o = run(&[
        "phase-grid",
        "--bath-ratio",
        "100",
        "--dissipation-ratio",
        "0.05",
        "--resolution",
        "64",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let prov = Provenance::from_header_line(header).unwrap();
    assert_eq!(prov.config.options.resolution, 64);
    let cols: Vec<f64> = lines.next().unwrap().split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for line in lines {
        let mut fields = line.split(',').map(|v| v.parse::<f64>().unwrap());
        let row = fields.next().unwrap();
        for (col, s) in cols.iter().zip(fields) {
            if s > best.2 {
                best = (row, *col, s);
            }
        }
    }
    let spacing = 2.0 * PI / 64.0;
    let off = ((best.0 - best.1 - PI).rem_euclid(2.0 * PI) + PI).rem_euclid(2.0 * PI) - PI;
    assert!(off.abs() < spacing, "argmax at ({}, {})", best.0, best.1);
}

#[test]
fn config_file_round_trips_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    let out = dir.path().join("rho.csv");
    let cfg = serde_json::json!({
        "schema_version": 1,
        "command": "steady-state",
        "params": SystemParams::reference(2),
        "options": { "seed": 5, "method": "analytic" }
    });
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let o = run(&[
        "steady-state",
        "--config",
        cfg_path.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let prov = Provenance::from_header_line(text.lines().next().unwrap()).unwrap();
    assert_eq!(prov.seed, 9);
    assert_eq!(prov.config.params, SystemParams::reference(2));
    let echoed: RunConfig = serde_json::from_str(&serde_json::to_string(&prov.config).unwrap()).unwrap();
    assert_eq!(echoed, prov.config);
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn scaling_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for _ in 0..2 {
        let o = run(&[
            "scaling", "--n-min", "2", "--n-max", "4", "--realizations", "3", "--seed", "11",
            "--bath-ratio", "10", "--out", dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        runs.push(read_all(dir.path()));
    }
    assert_eq!(
        runs[0].iter().map(|f| f.0.as_str()).collect::<Vec<_>>(),
        ["fig3_phases.csv", "fig3_scaling.csv"]
    );
    assert!(runs[0] == runs[1], "reruns differ");
}

#[test]
fn sweeps_write_into_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sweep-bath", "--values", "0.2,1,5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("fig2c.csv")).unwrap();
    assert!(text.starts_with("# params: "));
    assert_eq!(text.lines().count(), 2 + 3);
    let o = run(&["sweep-drive", "--values", "0.5,1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("fig2d.csv").exists());
}

#[test]
fn invalid_params_exit_two() {
    let o = run(&["sync", "--n-h", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "invalid_params");
    let o = run(&["sync", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "usage");
}

#[test]
fn solver_failure_exits_three() {
    // A single N value leaves nothing to fit.
    let o = run(&["scaling", "--n-min", "3", "--n-max", "3", "--realizations", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_json(&o)["exit_code"], 3);
}
