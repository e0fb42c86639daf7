//! Exhaustive enumeration of every schedule. Exponential; a test oracle only.

use std::collections::BTreeMap;

use super::{check_cap, OfflineSolution, SolverError};
use crate::instance::{Instance, RobotId};

/// Largest number of frozen robots [`opt_bruteforce`] accepts.
pub const BRUTEFORCE_CAP: usize = 7;

/// Minimum makespan found by trying every assignment of frozen robots to
/// ordered waker sequences (every forest, every visiting order).
///
/// Frozen robots are inserted one at a time into every position of every
/// robot's sequence, which produces each (parent, order) combination once;
/// combinations containing cycles are discarded when evaluated.
pub fn opt_bruteforce(inst: &Instance) -> Result<OfflineSolution, SolverError> {
    inst.validate()?;
    check_cap(inst, BRUTEFORCE_CAP)?;
    let robots = inst.robots();
    let n = robots.len();
    let m = inst.metric();
    let dist: Vec<Vec<f64>> = robots
        .iter()
        .map(|a| {
            robots
                .iter()
                .map(|b| m.distance(a.home, b.home).expect("validated homes"))
                .collect()
        })
        .collect();
    let frozen: Vec<usize> = (0..n).filter(|&i| !robots[i].initially_active).collect();

    let mut enumerator = Enumerator {
        release: robots.iter().map(|r| r.release).collect(),
        active: robots.iter().map(|r| r.initially_active).collect(),
        dist,
        seqs: vec![Vec::new(); n],
        best: f64::INFINITY,
        best_seqs: vec![Vec::new(); n],
        best_wake: vec![0.0; n],
    };
    enumerator.insert(&frozen, 0);

    let ids: Vec<RobotId> = robots.iter().map(|r| r.id).collect();
    let waker_seq: BTreeMap<RobotId, Vec<RobotId>> = enumerator
        .best_seqs
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(w, s)| (ids[w], s.iter().map(|&c| ids[c]).collect()))
        .collect();
    let wake_time = (0..n).map(|i| (ids[i], enumerator.best_wake[i])).collect();
    let makespan = if frozen.is_empty() { 0.0 } else { enumerator.best };
    Ok(OfflineSolution {
        makespan,
        wake_time,
        waker_seq,
    })
}

struct Enumerator {
    release: Vec<f64>,
    active: Vec<bool>,
    dist: Vec<Vec<f64>>,
    seqs: Vec<Vec<usize>>,
    best: f64,
    best_seqs: Vec<Vec<usize>>,
    best_wake: Vec<f64>,
}

impl Enumerator {
    fn insert(&mut self, frozen: &[usize], k: usize) {
        if k == frozen.len() {
            self.score();
            return;
        }
        let j = frozen[k];
        for w in 0..self.seqs.len() {
            if w == j {
                continue;
            }
            for pos in 0..=self.seqs[w].len() {
                self.seqs[w].insert(pos, j);
                self.insert(frozen, k + 1);
                self.seqs[w].remove(pos);
            }
        }
    }

    fn score(&mut self) {
        let n = self.seqs.len();
        let mut wake = vec![f64::NAN; n];
        let mut stack: Vec<usize> = (0..n).filter(|&i| self.active[i]).collect();
        for &s in &stack {
            wake[s] = 0.0;
        }
        let mut reached = stack.len();
        while let Some(w) = stack.pop() {
            let (mut t, mut at) = (wake[w], w);
            for &c in &self.seqs[w] {
                if !wake[c].is_nan() {
                    return;
                }
                t = (t + self.dist[at][c]).max(self.release[c]);
                at = c;
                wake[c] = t;
                reached += 1;
                stack.push(c);
            }
        }
        if reached < n {
            return;
        }
        let makespan = wake.iter().copied().fold(0.0, f64::max);
        if makespan < self.best {
            self.best = makespan;
            self.best_seqs = self.seqs.clone();
            self.best_wake = wake;
        }
    }
}
