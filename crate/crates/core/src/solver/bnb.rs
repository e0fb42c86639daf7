//! Depth-first branch and bound over chronologically ordered wake events.
//!
//! Every schedule can be listed as a sequence of wake events sorted by
//! time, so the search only extends a partial schedule with an event no
//! earlier than the last one. Among events at the same time, events whose
//! waker was already awake before that time are taken in increasing target
//! order; this removes the reorderings of simultaneous independent wakes.

use super::{check_cap, greedy_upper_bound, OfflineSolution, Problem, SolverConfig, SolverError};
use crate::instance::Instance;

const TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub incumbent_updates: u64,
}

/// Exact minimum makespan for `inst`.
pub fn opt_exact(inst: &Instance, cfg: &SolverConfig) -> Result<OfflineSolution, SolverError> {
    opt_exact_with_stats(inst, cfg).map(|(sol, _)| sol)
}

pub fn opt_exact_with_stats(
    inst: &Instance,
    cfg: &SolverConfig,
) -> Result<(OfflineSolution, SearchStats), SolverError> {
    inst.validate()?;
    check_cap(inst, cfg.frozen_cap)?;
    let p = Problem::new(inst);
    let frozen = p.frozen_indices();
    if frozen.is_empty() {
        return Ok((OfflineSolution::from_assignments(&p, &[]), SearchStats::default()));
    }

    let seed = greedy_upper_bound(inst);
    let mut search = Search::new(&p, frozen);
    search.best = seed.makespan;
    search.dfs(0.0, 0.0, 0);

    let sol = match search.best_plan.take() {
        Some(plan) => OfflineSolution::from_assignments(&p, &plan),
        None => seed,
    };
    Ok((sol, search.stats))
}

struct Search<'a> {
    p: &'a Problem,
    frozen: Vec<usize>,
    /// Earlier frozen robots with the same home and release as each frozen robot.
    twins: Vec<Vec<usize>>,
    awake: Vec<bool>,
    /// Robot index whose home is the current location of each awake robot.
    pos: Vec<usize>,
    free: Vec<f64>,
    /// Wake time of robots that started frozen.
    woken_at: Vec<Option<f64>>,
    remaining: usize,
    stack: Vec<(usize, usize, f64)>,
    best: f64,
    best_plan: Option<Vec<(usize, usize, f64)>>,
    stats: SearchStats,
}

impl<'a> Search<'a> {
    fn new(p: &'a Problem, frozen: Vec<usize>) -> Self {
        let twins = (0..p.n)
            .map(|j| {
                frozen
                    .iter()
                    .copied()
                    .take_while(|&i| i < j)
                    .filter(|&i| {
                        !p.active[j] && p.d(i, j) == 0.0 && p.release[i] == p.release[j]
                    })
                    .collect()
            })
            .collect();
        Self {
            p,
            remaining: frozen.len(),
            frozen,
            twins,
            awake: p.active.clone(),
            pos: (0..p.n).collect(),
            free: vec![0.0; p.n],
            woken_at: vec![None; p.n],
            stack: Vec::new(),
            best: f64::INFINITY,
            best_plan: None,
            stats: SearchStats::default(),
        }
    }

    /// Earliest possible wake of frozen robot `j` given the current state:
    /// any waker's route starts from some awake robot's current location.
    fn earliest(&self, j: usize, last_time: f64) -> f64 {
        let reach = (0..self.p.n)
            .filter(|&w| self.awake[w])
            .map(|w| self.free[w] + self.p.d(self.pos[w], j))
            .fold(f64::INFINITY, f64::min);
        reach.max(self.p.release[j]).max(last_time)
    }

    fn dfs(&mut self, last_time: f64, makespan: f64, last_target: usize) {
        self.stats.nodes += 1;
        if self.remaining == 0 {
            if makespan < self.best - TIE {
                self.best = makespan;
                self.best_plan = Some(self.stack.clone());
                self.stats.incumbent_updates += 1;
            }
            return;
        }
        let mut bound = makespan;
        for &j in &self.frozen {
            if !self.awake[j] {
                bound = bound.max(self.earliest(j, last_time));
            }
        }
        if bound >= self.best - TIE {
            return;
        }

        let mut moves = Vec::new();
        for &j in &self.frozen {
            if self.awake[j] || self.twins[j].iter().any(|&i| !self.awake[i]) {
                continue;
            }
            for w in 0..self.p.n {
                if !self.awake[w] || self.is_duplicate_waker(w) {
                    continue;
                }
                let t = (self.free[w] + self.p.d(self.pos[w], j)).max(self.p.release[j]);
                if t < last_time - TIE || t >= self.best - TIE {
                    continue;
                }
                if t <= last_time + TIE && !self.woken_at_instant(w, t) && j < last_target {
                    continue;
                }
                moves.push((t, w, j));
            }
        }
        moves.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        for (t, w, j) in moves {
            if t >= self.best - TIE {
                break;
            }
            let (old_pos, old_free) = (self.pos[w], self.free[w]);
            self.pos[w] = j;
            self.free[w] = t;
            self.awake[j] = true;
            self.pos[j] = j;
            self.free[j] = t;
            self.woken_at[j] = Some(t);
            self.remaining -= 1;
            self.stack.push((w, j, t));

            let next_target = match (t <= last_time + TIE, self.woken_at_instant(w, t)) {
                (true, true) => last_target,
                _ => j,
            };
            self.dfs(t.max(last_time), makespan.max(t), next_target);

            self.stack.pop();
            self.remaining += 1;
            self.woken_at[j] = None;
            self.awake[j] = false;
            self.pos[w] = old_pos;
            self.free[w] = old_free;
        }
    }

    /// True if `w` was itself woken at time `t`. Such wakes depend on an
    /// earlier event of the same instant and are exempt from target ordering.
    fn woken_at_instant(&self, w: usize, t: f64) -> bool {
        self.woken_at[w].is_some_and(|tw| tw >= t - TIE)
    }

    /// An awake robot with the same location and free time as an earlier
    /// awake robot offers no new branches, provided both have the same
    /// standing under the same-instant ordering rule.
    fn is_duplicate_waker(&self, w: usize) -> bool {
        let fresh = |x: usize| self.woken_at_instant(x, self.free[x]);
        (0..w).any(|v| {
            self.awake[v]
                && self.p.d(self.pos[v], self.pos[w]) == 0.0
                && (self.free[v] - self.free[w]).abs() <= TIE
                && fresh(v) == fresh(w)
        })
    }
}
