use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use walklab::report::AnalysisReport;

fn walklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walklab")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn gen_to(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &path]);
    assert!(walklab(&full).status.success());
    path
}

#[test]
fn gen_writes_expected_edge_counts() {
    for (args, lines) in [
        (vec!["gen", "clique4-minus-edge"], 5),
        (vec!["gen", "fig3"], 4),
        (vec!["gen", "triangle-arm"], 4),
        (vec!["gen", "tri-torus", "--rows", "4", "--cols", "4"], 48),
        (vec!["gen", "circulant", "--n", "8", "--offsets", "1,2"], 16),
    ] {
        let out = walklab(&args);
        assert!(out.status.success(), "{args:?}");
        assert_eq!(stdout(&out).lines().count(), lines, "{args:?}");
    }
}

#[test]
fn gen_rejects_bad_input_with_usage_code() {
    assert_eq!(walklab(&["gen", "hexagon"]).status.code(), Some(2));
    assert_eq!(walklab(&["gen", "cycle"]).status.code(), Some(2));
    assert_eq!(walklab(&["gen", "cycle", "--n", "2"]).status.code(), Some(2));
    assert_eq!(walklab(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn analyze_report_round_trips_and_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let graph = gen_to(dir.path(), "c4.txt", &["clique4-minus-edge"]);
    let report_path = dir.path().join("r.json");
    let out = walklab(&["analyze", &graph, "--out", report_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&report_path).unwrap();
    let report: AnalysisReport = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::from_str::<AnalysisReport>(&serde_json::to_string(&report).unwrap()).unwrap(), report);
    assert_eq!(report.schema_version, 1);
    let balance = report.balance.as_ref().unwrap();
    assert!(!balance.eulerian.eulerian);
    assert!(!balance.regular);
    assert!(balance.wdb_residual < 1e-10);
    // The flat turns through the two degree-2 nodes carry 1/20.
    let wedge = &report.stationary.as_ref().unwrap().wedge.values;
    assert!(wedge.iter().any(|v| (v - 0.05).abs() < 1e-12));
}

#[test]
fn analyze_regular_graph_has_lambda_proportional_measure() {
    let dir = TempDir::new().unwrap();
    let graph = gen_to(dir.path(), "k4.txt", &["complete", "--n", "4"]);
    let out = walklab(&["analyze", &graph, "--alpha", "1", "--beta", "2", "--gamma", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report: AnalysisReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.balance.as_ref().unwrap().eulerian.eulerian);
    let wedge = &report.stationary.as_ref().unwrap().wedge.values;
    // K4 has 12 flat and 24 triangle wedges: Z = 12 + 48.
    let z = 60.0;
    assert!(wedge.iter().all(|v| [1.0 / z, 2.0 / z, 3.0 / z].iter().any(|t| (v - t).abs() < 1e-12)));
}

#[test]
fn analyze_reports_non_bistochastic_edge_kernel() {
    let dir = TempDir::new().unwrap();
    let graph = gen_to(dir.path(), "arm.txt", &["triangle-arm"]);
    let out = walklab(&["analyze", &graph, "--alpha", "1", "--beta", "2", "--gamma", "3", "--recurrence-lab"]);
    assert_eq!(out.status.code(), Some(0));
    let report: AnalysisReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.bistochastic.unwrap().edge.max_deviation > 1e-3);
}

#[test]
fn analyze_exit_codes() {
    let dir = TempDir::new().unwrap();
    let torus = gen_to(dir.path(), "t.txt", &["tri-torus", "--rows", "4", "--cols", "4"]);
    // Rounding residuals exceed an impossible tolerance, so verifiers report violations.
    assert_eq!(walklab(&["analyze", &torus, "--tol", "1e-30"]).status.code(), Some(1));

    let split = dir.path().join("split.txt");
    fs::write(&split, "0 1\n2 3\n").unwrap();
    assert_eq!(walklab(&["analyze", split.to_str().unwrap()]).status.code(), Some(2));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0 1\n1 x\n").unwrap();
    assert_eq!(walklab(&["analyze", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(walklab(&["analyze", "/no/such/file"]).status.code(), Some(2));
    assert_eq!(walklab(&["analyze", &torus, "--beta", "0"]).status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let graph = gen_to(dir.path(), "c4.txt", &["clique4-minus-edge"]);
    let run = |seed: &str| {
        let out = walklab(&["simulate", &graph, "--steps", "20000", "--seed", seed, "--beta", "2", "--gamma", "3"]);
        assert!(out.status.success());
        stdout(&out)
    };
    let (a, b, c) = (run("42"), run("42"), run("43"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    let mut lines = a.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(header["seed"], 42);
    assert_eq!(header["steps"], 20000);
    assert_eq!(lines.count(), 20002);
    assert_eq!(header["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn simulate_reports_trapped_walk() {
    let dir = TempDir::new().unwrap();
    let graph = gen_to(dir.path(), "p.txt", &["path", "--n", "4"]);
    let out = walklab(&["simulate", &graph, "--alpha", "0", "--steps", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trapped"));
}

#[test]
fn recurrence_emits_growth_tables() {
    let out = walklab(&["recurrence", "--family", "triangular", "--radii", "2..6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("size,R_srw,R_kbar,ratio"));
    assert_eq!(lines.count(), 5);

    let out = walklab(&["recurrence", "--family", "tree3", "--radii", "2,4,6"]);
    let text = stdout(&out);
    for line in text.lines().skip(1) {
        let r_srw: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(r_srw < 2.0 / 3.0);
    }
}

#[test]
fn kernel_dump_lists_states() {
    let dir = TempDir::new().unwrap();
    let graph = gen_to(dir.path(), "arm.txt", &["triangle-arm"]);
    let out = walklab(&["kernel", &graph, "--space", "wedge"]);
    assert!(out.status.success());
    let dump: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(dump["states"].as_array().unwrap().len(), 18);
    assert_eq!(dump["denominators"].as_array().unwrap().len(), 8);
}

#[test]
fn thread_cap_is_honoured() {
    let out = Command::new(env!("CARGO_BIN_EXE_walklab"))
        .args(["recurrence", "--family", "tree3", "--radii", "2..3"])
        .env("WALKLAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_walklab"))
        .args(["recurrence", "--family", "tree3"])
        .env("WALKLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
