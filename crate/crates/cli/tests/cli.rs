use std::f64::consts::PI;
use std::process::{Command, Output};

use envest::bayes::{risk_moments, solve_theta};
use envest::channel::{ProbeConfig, ProbeForm};
use envest::gate_family::Edge;
use envest::probe_opt::{cost_landscape, GridSpec};
use envest::report::{matrix_from_json, parse_landscape_csv, JsonReport};
use serde_json::Value;

fn envest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_envest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = envest(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> JsonReport {
    JsonReport::from_json(&stdout(args)).unwrap()
}

#[test]
fn edges_lists_six_rows() {
    let text = stdout(&["edges"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[1], "E1,pi/2,pi/2,alpha,DCNOT,SWAP");
    let doc = json(&["edges", "--format", "json"]);
    assert_eq!(doc.command, "edges");
    assert_eq!(doc.results["edges"].as_array().unwrap().len(), 6);
}

#[test]
fn solve_e1_reports_minimum_cost() {
    let doc = json(&["solve", "--edge", "E1", "--x", "0.5", "--t", "0.5"]);
    assert_eq!(doc.edge, Some(Edge::E1));
    let cost = doc.results["min_cost"].as_f64().unwrap();
    let want = -0.5 - 8.0 / (PI * PI) + 4.0 / PI + PI * PI / 48.0;
    assert!((cost - want).abs() < 1e-9);
    assert!((cost - 0.1682).abs() < 1e-4);
    for key in [
        "command",
        "edge",
        "inputs",
        "results",
        "tolerances",
        "seed",
        "version",
    ] {
        assert!(
            serde_json::from_str::<Value>(&stdout(&["solve", "--edge", "E2"]))
                .unwrap()
                .get(key)
                .is_some()
        );
    }
}

#[test]
fn solve_json_round_trips_theta() {
    let doc = json(&[
        "solve", "--edge", "E6", "--x", "0.3", "--t", "0.8", "--phi1", "pi/3", "--phi2", "-pi/4",
    ]);
    let cfg = ProbeConfig::new(0.3, 0.8, PI / 3.0, 2.0 * PI - PI / 4.0).unwrap();
    let sol = solve_theta(&risk_moments(Edge::E6, &cfg, 96).unwrap()).unwrap();
    let theta = matrix_from_json(&doc.results["theta"]).unwrap();
    assert!((theta - sol.theta).iter().all(|z| z.norm() <= 1e-12));
    assert!((doc.results["min_cost"].as_f64().unwrap() - sol.min_cost).abs() <= 1e-12);
    let eig: Vec<f64> = serde_json::from_value(doc.results["eigenvalues"].clone()).unwrap();
    assert!(eig
        .iter()
        .zip(sol.eigenvalues)
        .all(|(a, b)| (a - b).abs() <= 1e-12));
}

#[test]
fn optimize_e3_finds_factorable_input() {
    let doc = json(&["optimize", "--edge", "E3"]);
    let best = &doc.results["best_config"];
    assert!(best["x"].as_f64().unwrap().abs() < 1e-6);
    assert!((best["t"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let cost = doc.results["best_cost"].as_f64().unwrap();
    assert!((cost - (PI * PI / 48.0 - 1.0 / (PI * PI))).abs() < 1e-6);
    assert_eq!(doc.results["strategy"], "factorable-probe");
}

#[test]
fn sweep_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = envest(&[
        "sweep",
        "--edge",
        "E5",
        "--grid",
        "5",
        "--phases",
        "2",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x,t,phi1,phi2,cost\n") && !text.contains('\r'));
    let parsed = parse_landscape_csv(&text).unwrap();
    let direct = cost_landscape(
        Edge::E5,
        &GridSpec::uniform(5, 5, 2),
        ProbeForm::Standard,
        96,
    )
    .unwrap();
    assert_eq!(parsed.len(), direct.len());
    for (a, b) in parsed.iter().zip(&direct) {
        assert!((a.cost - b.cost).abs() <= 1e-12);
        assert!((a.config.x - b.config.x).abs() <= 1e-12);
        assert!((a.config.phi2 - b.config.phi2).abs() <= 1e-12);
    }
}

#[test]
fn sweep_json_is_lossless() {
    let doc = json(&[
        "sweep", "--edge", "E4", "--grid", "3", "--phases", "1", "--format", "json",
    ]);
    let direct = cost_landscape(
        Edge::E4,
        &GridSpec::uniform(3, 3, 1),
        ProbeForm::Standard,
        96,
    )
    .unwrap();
    let costs: Vec<f64> = doc.results["landscape"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["cost"].as_f64().unwrap())
        .collect();
    assert_eq!(costs, direct.iter().map(|p| p.cost).collect::<Vec<_>>());
}

#[test]
fn simulate_is_seeded() {
    let args = [
        "simulate", "--edge", "E1", "--trials", "50000", "--seed", "9",
    ];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a.results, b.results);
    assert_eq!(a.seed, Some(9));
    assert!(a.results["z"].as_f64().unwrap() <= 4.0);
    let blind = json(&[
        "simulate", "--edge", "E1", "--trials", "50000", "--povm", "blind",
    ]);
    assert_eq!(blind.results["povm_source"], "blind");
}

#[test]
fn validate_passes_and_is_deterministic() {
    let args = [
        "validate",
        "--trials",
        "200000",
        "--samples",
        "100",
        "--format",
        "json",
    ];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a.results["passed"], true);
    let mc = |d: &JsonReport| d.results["criteria"][9]["detail"].clone();
    assert_eq!(mc(&a), mc(&b));
    let text = stdout(&["validate", "--trials", "100000", "--samples", "50"]);
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().all(|l| l.starts_with("[PASS]")));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["solve"][..],
        &["solve", "--edge", "E7"],
        &["solve", "--edge", "E1", "--x", "1.5"],
        &["solve", "--edge", "E1", "--phi1", "pi/0"],
        &["solve", "--edge", "E1", "--format", "csv"],
        &["sweep"],
        &["frobnicate"],
    ] {
        assert_eq!(envest(args).status.code(), Some(2), "{args:?}");
    }
}
