use std::path::PathBuf;
use std::process::{Command, Output};

use ftag::verify::{criteria, isomorphic, run, VerifyContext};
use ftag_core::metric::{GraphSpec, MetricSpace};
use ftag_core::{build_metric_k, opt_bruteforce, Instance};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn ftag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftag"))
        .args(args)
        .env_remove("FTAG_SOLVER_CAP")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn solve_golden_outputs() {
    let out = ftag(&["solve", fixture("m1_sigma_a.json").to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "makespan 1.000000000\n");
    let out = ftag(&["solve", fixture("no_frozen.json").to_str().unwrap()]);
    assert_eq!(stdout(&out), "makespan 0.000000000\n");
}

#[test]
fn solve_random_fixture_matches_bruteforce() {
    let path = fixture("random5.json");
    let inst = Instance::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(inst.robots().len(), 5);
    let want = opt_bruteforce(&inst).unwrap().makespan;
    let out = ftag(&["solve", path.to_str().unwrap()]);
    assert_eq!(stdout(&out), format!("makespan {want:.9}\n"));
}

#[test]
fn solve_writes_solution_json() {
    let dir = std::env::temp_dir().join(format!("ftag-solve-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("sol.json");
    let out = ftag(&[
        "solve",
        fixture("m1_sigma_a.json").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["makespan"], 1.0);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn simulate_golden_outputs() {
    let sigma = fixture("m1_sigma_a.json");
    let out = ftag(&["simulate", "--strategy", "patience", sigma.to_str().unwrap()]);
    assert!(stdout(&out).contains("makespan 2.414213562\n"));
    assert!(stdout(&out).contains("ratio 2.414213562\n"));
    let out = ftag(&["simulate", "--strategy", "greedy", "--opt", "1", sigma.to_str().unwrap()]);
    assert!(stdout(&out).contains("makespan 2.000000000\n"));
    let out = ftag(&["simulate", "--strategy", "greedy", fixture("no_frozen.json").to_str().unwrap()]);
    assert!(stdout(&out).contains("makespan 0.000000000\n"));
}

#[test]
fn simulate_writes_trace_csv() {
    let dir = std::env::temp_dir().join(format!("ftag-sim-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let trace = dir.join("trace.csv");
    let positions = dir.join("pos.csv");
    let out = ftag(&[
        "simulate",
        "--strategy",
        "patience",
        "--trace",
        trace.to_str().unwrap(),
        "--positions",
        positions.to_str().unwrap(),
        "--dt",
        "0.5",
        fixture("m1_sigma_a.json").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("time,event,robot,location\n"));
    assert!(csv.contains("2.414213562,wake,2,p3"));
    let pos = std::fs::read_to_string(&positions).unwrap();
    assert!(pos.starts_with("time,robot,location\n"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn adversary_golden_outputs() {
    let out = ftag(&["adversary", "--k", "1", "--strategy", "patience"]);
    let text = stdout(&out);
    assert!(text.contains("case case1\n"));
    assert!(text.contains("ratio 2.414213562\n"));
    assert!(text.contains("r_bound 2.242640687\n"));
    let out = ftag(&["adversary", "--k", "2", "--strategy", "greedy"]);
    let text = stdout(&out);
    let ratio: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("ratio "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio >= 2.33315);
}

#[test]
fn adversary_report_file() {
    let dir = std::env::temp_dir().join(format!("ftag-adv-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let report = dir.join("report.json");
    let out = ftag(&[
        "adversary",
        "--k",
        "1",
        "--strategy",
        "greedy",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["case"], "case2");
    assert_eq!(v["achieved_ratio"], 2.5);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join(format!("ftag-exit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"metric\": ").unwrap();
    assert_eq!(ftag(&["solve", bad.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&bad, "{\"metric\": {\"vertices\": [\"a\"], \"edges\": []}, \"robots\": [], \"extra\": 1}").unwrap();
    assert_eq!(ftag(&["solve", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(ftag(&["solve", "/nonexistent/x.json"]).status.code(), Some(2));
    std::fs::remove_dir_all(dir).unwrap();

    let sigma = fixture("m1_sigma_a.json");
    let capped = Command::new(env!("CARGO_BIN_EXE_ftag"))
        .args(["solve", sigma.to_str().unwrap()])
        .env("FTAG_SOLVER_CAP", "1")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(3));
    let horizon = ftag(&["simulate", "--strategy", "patience", "--max-time", "2", sigma.to_str().unwrap()]);
    assert_eq!(horizon.status.code(), Some(4));
    assert_eq!(
        ftag(&["simulate", "--strategy", "nope", sigma.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(ftag(&["adversary", "--k", "4", "--strategy", "greedy"]).status.code(), Some(2));
}

#[test]
fn random_is_reproducible() {
    let a = stdout(&ftag(&["random", "--seed", "17"]));
    let b = stdout(&ftag(&["random", "--seed", "17"]));
    assert_eq!(a, b);
    assert!(Instance::from_json(&a).is_ok());
}

#[test]
fn verify_filter_and_table() {
    let out = ftag(&["verify", "--filter", "R_k"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("criterion | status | expected | observed | tolerance | seconds\n"));
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("2.242640687"));
    let rows = run(Some("lower bound"), &VerifyContext::default());
    assert_eq!(rows.iter().map(|r| r.id).collect::<Vec<_>>(), vec![4, 5]);
    assert_eq!(criteria().len(), 9);
}

#[test]
fn verify_output_names_the_bounds() {
    let rows = run(Some("4"), &VerifyContext::default());
    assert!(rows[0].expected.contains("2.414213562"));
    let rows = run(Some("5"), &VerifyContext::default());
    assert!(rows[0].expected.contains("2.333145751"));
}

#[test]
fn fixture_graph_is_m1() {
    let spec: GraphSpec =
        serde_json::from_str(&std::fs::read_to_string(fixture("m1_graph.json")).unwrap()).unwrap();
    let fig1 = MetricSpace::from_spec(&spec).unwrap();
    let m1 = build_metric_k(1).unwrap();
    assert!(isomorphic(&m1.metric, &fig1));
    let m2 = build_metric_k(2).unwrap();
    assert!(!isomorphic(&m2.metric, &fig1));
}

#[test]
fn m2_fixture_uses_m2() {
    let inst =
        Instance::from_json(&std::fs::read_to_string(fixture("m2_sigma_a.json")).unwrap()).unwrap();
    let m2 = build_metric_k(2).unwrap();
    assert!(isomorphic(inst.metric(), &m2.metric));
    assert_eq!(inst.starters().count(), 5);
    assert_eq!(inst.frozen_count(), 6);
}
