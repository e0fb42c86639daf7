//! Offline optimum for a (truncated) instance: the minimum makespan over all
//! schedules in which awake robots visit frozen robots in sequence.
//!
//! A schedule is described by, for every robot, the ordered list of robots
//! it personally wakes. A waker travels directly between homes and waits at
//! a target until its release, so `wake(child) = max(release, arrival)`.

mod bnb;
mod brute;
mod greedy;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, InstanceError, RobotId};
use crate::metric::EPS;

pub use bnb::{opt_exact, opt_exact_with_stats, SearchStats};
pub use brute::{opt_bruteforce, BRUTEFORCE_CAP};
pub use greedy::greedy_upper_bound;

/// Environment variable overriding [`SolverConfig::frozen_cap`].
pub const SOLVER_CAP_ENV: &str = "FTAG_SOLVER_CAP";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Largest number of frozen robots `opt_exact` accepts.
    pub frozen_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { frozen_cap: 12 }
    }
}

impl SolverConfig {
    /// Default config, with the cap taken from `FTAG_SOLVER_CAP` when set.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Some(cap) = std::env::var(SOLVER_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
        {
            cfg.frozen_cap = cap;
        }
        cfg
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("{frozen} frozen robots exceed the solver cap of {cap}")]
    TooLarge { frozen: usize, cap: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(#[from] InstanceError),
    #[error("inconsistent solution: {0}")]
    InconsistentSolution(String),
}

/// A schedule for every released robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineSolution {
    pub makespan: f64,
    /// Absolute time each robot becomes active (0 for initially active robots).
    #[serde(rename = "wake_times")]
    pub wake_time: BTreeMap<RobotId, f64>,
    /// Robots woken by each robot, in visiting order. Robots that wake
    /// nobody are omitted.
    pub waker_seq: BTreeMap<RobotId, Vec<RobotId>>,
}

impl OfflineSolution {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        crate::instance::parse_json(text)
    }

    /// The robot that wakes `id`, if any.
    pub fn waker_of(&self, id: RobotId) -> Option<RobotId> {
        self.waker_seq
            .iter()
            .find(|(_, seq)| seq.contains(&id))
            .map(|(&w, _)| w)
    }

    /// Builds a solution from chronologically ordered `(waker, target, time)`
    /// assignments over robot indices of `p`.
    pub(crate) fn from_assignments(p: &Problem, assignments: &[(usize, usize, f64)]) -> Self {
        let mut wake_time = BTreeMap::new();
        for (i, &id) in p.ids.iter().enumerate() {
            if p.active[i] {
                wake_time.insert(id, 0.0);
            }
        }
        let mut waker_seq: BTreeMap<RobotId, Vec<RobotId>> = BTreeMap::new();
        let mut makespan = 0.0f64;
        for &(w, j, t) in assignments {
            waker_seq.entry(p.ids[w]).or_default().push(p.ids[j]);
            wake_time.insert(p.ids[j], t);
            makespan = makespan.max(t);
        }
        Self {
            makespan,
            wake_time,
            waker_seq,
        }
    }
}

/// Index-based view of an instance used by the solvers.
#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub ids: Vec<RobotId>,
    pub release: Vec<f64>,
    pub active: Vec<bool>,
    /// Row-major distances between robot homes.
    pub dist: Vec<f64>,
    pub n: usize,
}

impl Problem {
    pub fn new(inst: &Instance) -> Self {
        let robots = inst.robots();
        let n = robots.len();
        let m = inst.metric();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = m.distance_unchecked(robots[i].home, robots[j].home);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Self {
            ids: robots.iter().map(|r| r.id).collect(),
            release: robots.iter().map(|r| r.release).collect(),
            active: robots.iter().map(|r| r.initially_active).collect(),
            dist,
            n,
        }
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn frozen_indices(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.active[i]).collect()
    }
}

/// Recomputes every wake time from `sol.waker_seq` alone and returns the
/// resulting makespan. Fails if the sequences do not form a forest rooted at
/// the initially active robots covering every frozen robot, or if a recorded
/// wake time precedes a release or disagrees with the recomputation.
pub fn evaluate(sol: &OfflineSolution, inst: &Instance) -> Result<f64, SolverError> {
    let bad = |msg: String| Err(SolverError::InconsistentSolution(msg));
    let m = inst.metric();
    let robots = inst.robots();
    let index = |id: RobotId| robots.iter().position(|r| r.id == id);

    let mut parent: BTreeMap<RobotId, RobotId> = BTreeMap::new();
    for (&w, seq) in &sol.waker_seq {
        if index(w).is_none() {
            return bad(format!("unknown waker {w}"));
        }
        for &c in seq {
            let Some(ci) = index(c) else {
                return bad(format!("unknown robot {c}"));
            };
            if robots[ci].initially_active {
                return bad(format!("initially active robot {c} is woken"));
            }
            if parent.insert(c, w).is_some() {
                return bad(format!("robot {c} is woken twice"));
            }
        }
    }

    let mut wake: BTreeMap<RobotId, f64> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for r in inst.starters() {
        wake.insert(r.id, 0.0);
        queue.push_back(r.id);
    }
    while let Some(w) = queue.pop_front() {
        let Some(seq) = sol.waker_seq.get(&w) else {
            continue;
        };
        let mut t = wake[&w];
        let mut pos = robots[index(w).unwrap()].home;
        for &c in seq {
            let rc = &robots[index(c).unwrap()];
            t = (t + m.distance_unchecked(pos, rc.home)).max(rc.release);
            pos = rc.home;
            wake.insert(c, t);
            queue.push_back(c);
        }
    }

    for r in inst.frozen() {
        let Some(&computed) = wake.get(&r.id) else {
            return bad(format!("robot {} is never woken (orphan or cycle)", r.id));
        };
        let Some(&recorded) = sol.wake_time.get(&r.id) else {
            return bad(format!("robot {} has no recorded wake time", r.id));
        };
        if recorded < r.release - EPS {
            return bad(format!(
                "robot {} woken at {recorded} before its release {}",
                r.id, r.release
            ));
        }
        if (recorded - computed).abs() > EPS {
            return bad(format!(
                "robot {} recorded wake {recorded} but schedule gives {computed}",
                r.id
            ));
        }
    }
    Ok(wake.values().copied().fold(0.0, f64::max))
}

pub(crate) fn check_cap(inst: &Instance, cap: usize) -> Result<(), SolverError> {
    let frozen = inst.frozen_count();
    if frozen > cap {
        return Err(SolverError::TooLarge { frozen, cap });
    }
    Ok(())
}
