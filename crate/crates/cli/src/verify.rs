//! The acceptance criteria, runnable from `ftag verify` and from the
//! `acceptance` test target.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

use ftag_core::adversary::n_sequence;
use ftag_core::metric::{GraphSpec, MetricSpace, Point};
use ftag_core::random::{random_instance, RandomConfig};
use ftag_core::sim::EventKind;
use ftag_core::{
    build_metric_k, opt_bruteforce, opt_exact, run_adversary, simulate, AdversaryOptions,
    GreedyDispatch, Instance, Patience, SimOptions, SolverConfig, Strategy, Trace,
};
use rayon::prelude::*;

const SIGMA_A: &str = include_str!("../../../fixtures/m1_sigma_a.json");
const SIGMA_A_ONE: &str = include_str!("../../../fixtures/m1_sigma_a_one_starter.json");
const M1_GRAPH: &str = include_str!("../../../fixtures/m1_graph.json");

/// Instances of the upper-bound suite (criteria 2, 3 and 9).
pub const SUITE_SIZE: u64 = 200;
/// Instances of the solver cross-check (criterion 8).
pub const ORACLE_SIZE: u64 = 100;

/// Things a criterion may be checked against; tests swap in broken
/// versions to make sure the suite notices.
#[derive(Clone, Copy)]
pub struct VerifyContext {
    pub r_bound: fn(u32) -> f64,
}

impl Default for VerifyContext {
    fn default() -> Self {
        Self {
            r_bound: ftag_core::r_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: u32,
    pub name: &'static str,
    pub expected: String,
    pub observed: String,
    pub tolerance: String,
    pub passed: bool,
    pub elapsed: Duration,
}

impl Row {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {} ({}): expected {}; observed {}; tolerance {}; {:.2}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.expected,
            self.observed,
            self.tolerance,
            self.elapsed.as_secs_f64()
        )
    }
}

struct Outcome {
    expected: String,
    observed: String,
    tolerance: String,
    passed: bool,
}

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub time_limit: Duration,
    check: fn(&VerifyContext) -> Outcome,
}

pub fn criteria() -> Vec<Criterion> {
    let c = |id, name, secs, check| Criterion {
        id,
        name,
        time_limit: Duration::from_secs(secs),
        check,
    };
    vec![
        c(1, "OPT feasibility pair", 1, opt_pair as fn(&VerifyContext) -> Outcome),
        c(2, "patience upper bound 1+√2", 120, upper_bound),
        c(3, "nearby invariant", 120, nearby),
        c(4, "lower bound k=1", 10, lower_bound_1),
        c(5, "lower bound k=2", 120, lower_bound_2),
        c(6, "construction invariants", 60, construction),
        c(7, "R_k identity", 1, r_identity),
        c(8, "solver oracle equivalence", 60, oracle),
        c(9, "engine properties", 120, engine),
    ]
}

impl Criterion {
    pub fn matches(&self, filter: &str) -> bool {
        let f = filter.to_lowercase();
        self.id.to_string() == f || self.name.to_lowercase().contains(&f)
    }

    pub fn run(&self, ctx: &VerifyContext) -> Row {
        let start = Instant::now();
        let out = (self.check)(ctx);
        let elapsed = start.elapsed();
        let in_time = elapsed <= self.time_limit;
        let mut observed = out.observed;
        if !in_time {
            observed += &format!(" (over the {}s limit)", self.time_limit.as_secs());
        }
        Row {
            id: self.id,
            name: self.name,
            expected: out.expected,
            observed,
            tolerance: out.tolerance,
            passed: out.passed && in_time,
            elapsed,
        }
    }
}

/// Runs every criterion matching `filter` (all if `None`), in parallel.
pub fn run(filter: Option<&str>, ctx: &VerifyContext) -> Vec<Row> {
    let selected: Vec<Criterion> = criteria()
        .into_iter()
        .filter(|c| filter.is_none_or(|f| c.matches(f)))
        .collect();
    selected.par_iter().map(|c| c.run(ctx)).collect()
}

pub fn run_one(id: u32, ctx: &VerifyContext) -> Row {
    criteria()
        .into_iter()
        .find(|c| c.id == id)
        .expect("known criterion")
        .run(ctx)
}

pub fn table(rows: &[Row]) -> String {
    let mut out = String::from("criterion | status | expected | observed | tolerance | seconds\n");
    for r in rows {
        out += &format!(
            "{} {} | {} | {} | {} | {} | {:.2}\n",
            r.id,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.expected,
            r.observed,
            r.tolerance,
            r.elapsed.as_secs_f64()
        );
    }
    out
}

fn fixture(text: &str) -> Instance {
    Instance::from_json(text).expect("fixture is valid")
}

fn opt_pair(_: &VerifyContext) -> Outcome {
    let cfg = SolverConfig::default();
    let two = opt_exact(&fixture(SIGMA_A), &cfg).map(|s| s.makespan);
    let one = opt_exact(&fixture(SIGMA_A_ONE), &cfg).map(|s| s.makespan);
    let passed = matches!((&two, &one), (Ok(a), Ok(b)) if (a - 1.0).abs() <= 1e-9 && (b - 2.0).abs() <= 1e-9);
    Outcome {
        expected: "2 starters 1.0, 1 starter 2.0".into(),
        observed: format!("2 starters {two:?}, 1 starter {one:?}"),
        tolerance: "1e-9, < 1 s".into(),
        passed,
    }
}

struct SuiteRun {
    inst: Instance,
    opt: f64,
    trace: Trace,
}

fn suite() -> Result<Vec<SuiteRun>, String> {
    (0..SUITE_SIZE)
        .into_par_iter()
        .map(|seed| {
            let inst = random_instance(seed, &RandomConfig::default());
            let opt = opt_exact(&inst, &SolverConfig::default())
                .map_err(|e| format!("seed {seed}: {e}"))?
                .makespan;
            let trace = simulate(&inst, &mut Patience::default(), SimOptions::default())
                .map_err(|e| format!("seed {seed}: {e}"))?;
            Ok(SuiteRun { inst, opt, trace })
        })
        .collect()
}

fn failed_run(expected: &str, tolerance: &str, err: String) -> Outcome {
    Outcome {
        expected: expected.into(),
        observed: format!("run failed: {err}"),
        tolerance: tolerance.into(),
        passed: false,
    }
}

fn upper_bound(_: &VerifyContext) -> Outcome {
    let bound = 1.0 + SQRT_2;
    let expected = format!("max ratio <= {bound:.9} on {SUITE_SIZE} instances");
    let tol = "1e-6, < 120 s";
    let runs = match suite() {
        Ok(r) => r,
        Err(e) => return failed_run(&expected, tol, e),
    };
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (seed, r) in runs.iter().enumerate() {
        if r.opt > 0.0 {
            let ratio = r.trace.makespan() / r.opt;
            worst = worst.max(ratio);
            if ratio > bound + 1e-6 {
                bad.push(seed);
            }
        } else if r.trace.makespan() > 1e-9 {
            bad.push(seed);
        }
    }
    Outcome {
        expected,
        observed: format!("max ratio {worst:.9}, violations {bad:?}"),
        tolerance: tol.into(),
        passed: bad.is_empty(),
    }
}

fn nearby(_: &VerifyContext) -> Outcome {
    let expected = "distance to home <= T/(1+√2) at every sample (dt 0.01)".to_string();
    let tol = "1e-6";
    let runs = match suite() {
        Ok(r) => r,
        Err(e) => return failed_run(&expected, tol, e),
    };
    let mut worst = f64::NEG_INFINITY;
    let mut samples = 0usize;
    for r in &runs {
        let m = r.inst.metric();
        let homes: BTreeMap<_, _> = r.trace.robots().iter().map(|s| (s.id, s.home)).collect();
        for t in sample_times(r.trace.end_time(), 0.01) {
            for (id, p) in r.trace.positions_at(t).expect("time in range") {
                let excess = m.distance(p, homes[&id]).expect("valid") - t / (1.0 + SQRT_2);
                worst = worst.max(excess);
                samples += 1;
            }
        }
    }
    Outcome {
        expected,
        observed: format!("max excess {worst:.3e} over {samples} samples"),
        tolerance: tol.into(),
        passed: worst <= 1e-6,
    }
}

fn sample_times(end: f64, dt: f64) -> impl Iterator<Item = f64> {
    let n = (end / dt).floor() as usize;
    (0..=n).map(move |i| (i as f64 * dt).min(end)).chain(std::iter::once(end))
}

fn adversary_rows(k: usize) -> Result<Vec<(String, f64)>, String> {
    let mut strategies: Vec<Box<dyn Strategy>> = vec![Box::new(GreedyDispatch::new()), Box::new(Patience::default())];
    let mut out = Vec::new();
    for s in strategies.iter_mut() {
        let rep = run_adversary(k, s.as_mut(), &AdversaryOptions::default()).map_err(|e| e.to_string())?;
        if rep.certified_opt < rep.instance.last_release() - 1e-12 {
            return Err(format!("{}: certified opt below last release", rep.strategy));
        }
        out.push((rep.strategy.clone(), rep.achieved_ratio));
    }
    Ok(out)
}

fn lower_bound_1(ctx: &VerifyContext) -> Outcome {
    let r1 = (ctx.r_bound)(1);
    let expected = format!("greedy, patience >= R_1 - 0.01 = {:.9}; patience = {:.9}", r1 - 0.01, 1.0 + SQRT_2);
    let tol = "0.01 slack, patience 1e-6, < 10 s";
    match adversary_rows(1) {
        Err(e) => failed_run(&expected, tol, e),
        Ok(rows) => {
            let patience = rows.iter().find(|r| r.0 == "patience").map_or(f64::NAN, |r| r.1);
            let passed = rows.iter().all(|r| r.1 >= r1 - 0.01) && (patience - (1.0 + SQRT_2)).abs() <= 1e-6;
            Outcome {
                expected,
                observed: describe(&rows),
                tolerance: tol.into(),
                passed,
            }
        }
    }
}

fn lower_bound_2(ctx: &VerifyContext) -> Outcome {
    let r2 = (ctx.r_bound)(2);
    let expected = format!("greedy, patience >= R_2 - 0.01 = {:.9}", r2 - 0.01);
    let tol = "0.01 slack, < 120 s";
    match adversary_rows(2) {
        Err(e) => failed_run(&expected, tol, e),
        Ok(rows) => Outcome {
            expected,
            observed: describe(&rows),
            tolerance: tol.into(),
            passed: rows.iter().all(|r| r.1 >= r2 - 0.01),
        },
    }
}

fn describe(rows: &[(String, f64)]) -> String {
    rows.iter()
        .map(|(n, r)| format!("{n} {r:.9}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn construction(_: &VerifyContext) -> Outcome {
    let mut problems = Vec::new();
    let ns: Vec<u64> = (0..=3).filter_map(n_sequence).collect();
    if ns != [1, 2, 5, 26] {
        problems.push(format!("N sequence {ns:?}"));
    }
    for k in 1..=2 {
        let lb = match build_metric_k(k) {
            Ok(lb) => lb,
            Err(e) => {
                problems.push(format!("M_{k}: {e}"));
                continue;
            }
        };
        let m = &lb.metric;
        let origin = Point::Vertex(lb.origin);
        for copy in &lb.copies {
            for &v in &copy.vertices {
                let d = m.distance(origin, Point::Vertex(v)).expect("valid");
                if (d - 1.0).abs() > 1e-9 {
                    problems.push(format!("M_{k}: tree vertex at {d}"));
                }
            }
            // walk each leaf up to the root along the copy's own edges
            for leaf in lb.tree.leaves() {
                let mut len = 0.0;
                let mut node = leaf;
                while let Some(parent) = lb.tree.nodes[node].parent {
                    let (a, b) = (copy.vertices[parent], copy.vertices[node]);
                    let e = copy
                        .tree_edges
                        .iter()
                        .map(|&e| m.edge(e))
                        .find(|e| (e.u, e.v) == (a, b) || (e.u, e.v) == (b, a))
                        .expect("tree edge present");
                    len += e.length;
                    node = parent;
                }
                if (len - 1.0).abs() > 1e-9 {
                    problems.push(format!("M_{k}: root-to-leaf length {len}"));
                }
            }
        }
        for &s in &lb.spokes {
            let d = m.distance(origin, Point::Vertex(s)).expect("valid");
            if (d - (1.0 + SQRT_2)).abs() > 1e-9 {
                problems.push(format!("M_{k}: spoke end at {d}"));
            }
        }
    }
    let fig1: GraphSpec = serde_json::from_str(M1_GRAPH).expect("fixture graph");
    let fig1 = MetricSpace::from_spec(&fig1).expect("fixture graph is valid");
    match build_metric_k(1) {
        Ok(lb) if isomorphic(&lb.metric, &fig1) => {}
        _ => problems.push("M_1 not isomorphic to the m1_graph fixture".into()),
    }
    Outcome {
        expected: "N = 1,2,5,26; tree vertices at 1; leaves at depth 1; spokes at 1+√2; M_1 ≅ fixture".into(),
        observed: if problems.is_empty() {
            "all hold".into()
        } else {
            problems.join("; ")
        },
        tolerance: "1e-9".into(),
        passed: problems.is_empty(),
    }
}

/// Weighted multigraph isomorphism by backtracking; fine for small graphs.
pub fn isomorphic(a: &MetricSpace, b: &MetricSpace) -> bool {
    let n = a.num_vertices();
    if n != b.num_vertices() || a.num_edges() != b.num_edges() {
        return false;
    }
    let key = |len: f64| (len * 1e9).round() as i64;
    let adjacency = |m: &MetricSpace| {
        let mut adj = vec![vec![Vec::new(); n]; n];
        for e in m.edges() {
            adj[e.u.0][e.v.0].push(key(e.length));
            adj[e.v.0][e.u.0].push(key(e.length));
        }
        for row in &mut adj {
            for cell in row {
                cell.sort_unstable();
            }
        }
        adj
    };
    let (aa, ab) = (adjacency(a), adjacency(b));
    let signature = |adj: &Vec<Vec<Vec<i64>>>, v: usize| {
        let mut s: Vec<i64> = adj[v].iter().flatten().copied().collect();
        s.sort_unstable();
        s
    };
    let sig_a: Vec<_> = (0..n).map(|v| signature(&aa, v)).collect();
    let sig_b: Vec<_> = (0..n).map(|v| signature(&ab, v)).collect();

    fn extend(
        i: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        aa: &[Vec<Vec<i64>>],
        ab: &[Vec<Vec<i64>>],
        sig_a: &[Vec<i64>],
        sig_b: &[Vec<i64>],
    ) -> bool {
        let n = aa.len();
        if i == n {
            return true;
        }
        for j in 0..n {
            if used[j] || sig_a[i] != sig_b[j] || aa[i][i] != ab[j][j] {
                continue;
            }
            if (0..i).any(|p| aa[i][p] != ab[j][map[p]]) {
                continue;
            }
            map.push(j);
            used[j] = true;
            if extend(i + 1, map, used, aa, ab, sig_a, sig_b) {
                return true;
            }
            used[j] = false;
            map.pop();
        }
        false
    }
    extend(0, &mut Vec::new(), &mut vec![false; n], &aa, &ab, &sig_a, &sig_b)
}

fn r_identity(ctx: &VerifyContext) -> Outcome {
    let r = ctx.r_bound;
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let next = r(k) + SQRT_2 * (1.0 - r(k) * (SQRT_2 - 1.0));
        worst = worst.max((r(k + 1) - next).abs());
    }
    let r0 = (r(0) - 2.0).abs();
    let r1 = (r(1) - (3.0 * SQRT_2 - 2.0)).abs();
    let gap = 1.0 + SQRT_2 - r(10);
    let passed = worst <= 1e-12 && r0 <= 1e-12 && r1 <= 1e-12 && gap < 1e-3 && gap > 0.0;
    Outcome {
        expected: format!(
            "recurrence holds for k=0..10, R_0 = 2, R_1 = 3√2-2 = {:.9}, 1+√2-R_10 < 1e-3",
            3.0 * SQRT_2 - 2.0
        ),
        observed: format!(
            "max recurrence error {worst:.1e}, R_0 = {:.9}, R_1 = {:.9}, 1+√2-R_10 = {gap:.3e}, R_2 = {:.9}",
            r(0),
            r(1),
            r(2)
        ),
        tolerance: "1e-12".into(),
        passed,
    }
}

fn oracle(_: &VerifyContext) -> Outcome {
    let results: Vec<Result<f64, String>> = (0..ORACLE_SIZE)
        .into_par_iter()
        .map(|seed| {
            let inst = random_instance(seed, &RandomConfig::default());
            let exact = opt_exact(&inst, &SolverConfig::default()).map_err(|e| e.to_string())?;
            let brute = opt_bruteforce(&inst).map_err(|e| e.to_string())?;
            Ok((exact.makespan - brute.makespan).abs())
        })
        .collect();
    let errors: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let worst = results
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .fold(0.0f64, |a, &b| a.max(b));
    Outcome {
        expected: format!("opt_exact = opt_bruteforce on {ORACLE_SIZE} instances"),
        observed: format!("max difference {worst:.1e}, errors {}", errors.len()),
        tolerance: "1e-9, < 60 s".into(),
        passed: errors.is_empty() && worst <= 1e-9,
    }
}

fn engine(_: &VerifyContext) -> Outcome {
    let expected = "speed limit, causality and determinism on the upper-bound suite".to_string();
    let tol = "1e-9";
    let runs = match suite() {
        Ok(r) => r,
        Err(e) => return failed_run(&expected, tol, e),
    };
    let mut problems = Vec::new();
    for (seed, r) in runs.iter().enumerate() {
        if let Err(p) = engine_properties(&r.inst, &r.trace) {
            problems.push(format!("seed {seed}: {p}"));
        }
        match simulate(&r.inst, &mut Patience::default(), SimOptions::default()) {
            Ok(again) if again == r.trace => {}
            _ => problems.push(format!("seed {seed}: rerun differs")),
        }
    }
    Outcome {
        expected,
        observed: if problems.is_empty() {
            format!("{} traces checked", runs.len())
        } else {
            problems.join("; ")
        },
        tolerance: tol.into(),
        passed: problems.is_empty(),
    }
}

/// Speed limit and causality checks on one trace.
pub fn engine_properties(inst: &Instance, trace: &Trace) -> Result<(), String> {
    let m = inst.metric();
    if !trace.events().windows(2).all(|w| w[0].time <= w[1].time) {
        return Err("events out of order".into());
    }
    let wakes = trace.wake_times();
    let wake_events = trace.events().iter().filter(|e| e.kind == EventKind::Wake).count();
    if wake_events != inst.frozen_count() || wakes.len() != inst.frozen_count() {
        return Err(format!("{wake_events} wake events for {} frozen robots", inst.frozen_count()));
    }
    for r in inst.frozen() {
        if wakes[&r.id] < r.release - 1e-9 {
            return Err(format!("robot {} woken before release", r.id));
        }
    }
    if trace.makespan() != wakes.values().copied().fold(0.0, f64::max) {
        return Err("makespan differs from last wake".into());
    }
    let times: Vec<f64> = sample_times(trace.end_time(), 0.01).collect();
    let mut prev: Option<(f64, BTreeMap<_, _>)> = None;
    for &t in &times {
        let now = trace.positions_at(t).map_err(|e| e.to_string())?;
        for r in inst.frozen() {
            if t < wakes[&r.id] && m.distance(now[&r.id], r.home).expect("valid") > 1e-9 {
                return Err(format!("frozen robot {} moved", r.id));
            }
        }
        if let Some((t0, before)) = &prev {
            for (id, p) in &now {
                let d = m.distance(before[id], *p).expect("valid");
                if d > t - t0 + 1e-9 {
                    return Err(format!("robot {id} moved {d} in {}", t - t0));
                }
            }
        }
        prev = Some((t, now));
    }
    Ok(())
}
