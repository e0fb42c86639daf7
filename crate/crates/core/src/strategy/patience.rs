//! The patience algorithm. On every release it recomputes the optimum `OPT`
//! of the instance revealed so far and overwrites the schedule with:
//!
//! 1. every active robot returns to its home;
//! 2. wait until `wait_factor * OPT`;
//! 3. replay the optimal schedule shifted by that offset;
//! 4. return home and wait.
//!
//! With the default factor of √2, every robot stays within `T / (1 + √2)` of
//! its home at all times `T`, which guarantees that step 1 ends in time and
//! that the final wake happens by `(1 + √2) * OPT`.

use std::f64::consts::SQRT_2;

use super::StrategyConfigError;
use crate::instance::RobotId;
use crate::sim::{Leg, Plan, SimView, Strategy, StrategyError};
use crate::solver::{greedy_upper_bound, opt_exact, OfflineSolution, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptBackend {
    Exact(SolverConfig),
    /// Feasible but not optimal schedules; the competitive guarantee no
    /// longer applies.
    GreedyUpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatienceConfig {
    pub wait_factor: f64,
    pub opt_backend: OptBackend,
}

impl Default for PatienceConfig {
    fn default() -> Self {
        Self {
            wait_factor: SQRT_2,
            opt_backend: OptBackend::Exact(SolverConfig::default()),
        }
    }
}

impl PatienceConfig {
    pub fn new(wait_factor: f64, opt_backend: OptBackend) -> Result<Self, StrategyConfigError> {
        if !(wait_factor >= 1.0) || !wait_factor.is_finite() {
            return Err(StrategyConfigError::WaitFactorTooSmall(wait_factor));
        }
        Ok(Self {
            wait_factor,
            opt_backend,
        })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.opt_backend, OptBackend::Exact(_))
    }
}

/// The schedule currently in force: an offline solution replayed from the
/// robots' homes, shifted by `offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySchedule {
    pub solution: OfflineSolution,
    /// Value of the solution (`OPT` for the exact backend).
    pub opt: f64,
    /// `wait_factor * opt`; replay of a robot woken at `w` starts at `offset + w`.
    pub offset: f64,
}

impl ReplaySchedule {
    /// Absolute time robot `id` starts its replay legs.
    pub fn start_time(&self, id: RobotId) -> Option<f64> {
        self.solution.wake_time.get(&id).map(|w| self.offset + w)
    }

    /// Legs for robot `id`: go home, wait for its replay start, visit its
    /// wake targets on the shifted timetable, go home.
    pub fn legs_for(&self, view: &SimView<'_>, id: RobotId) -> Option<Vec<Leg>> {
        let home = view.home(id)?;
        let mut legs = vec![Leg::GoTo(home), Leg::WaitUntil(self.start_time(id)?)];
        if let Some(seq) = self.solution.waker_seq.get(&id) {
            for &c in seq {
                legs.push(Leg::GoTo(view.home(c)?));
                legs.push(Leg::WaitUntil(self.start_time(c)?));
            }
            legs.push(Leg::GoTo(home));
        }
        Some(legs)
    }
}

#[derive(Debug, Clone)]
pub struct Patience {
    cfg: PatienceConfig,
    schedule: Option<ReplaySchedule>,
    /// Number of released robots the current schedule was computed for.
    computed_for: usize,
}

impl Patience {
    pub fn new(cfg: PatienceConfig) -> Self {
        Self {
            cfg,
            schedule: None,
            computed_for: 0,
        }
    }

    pub fn config(&self) -> &PatienceConfig {
        &self.cfg
    }

    pub fn schedule(&self) -> Option<&ReplaySchedule> {
        self.schedule.as_ref()
    }

    fn recompute(&mut self, view: &SimView<'_>) -> Result<(), StrategyError> {
        let known = view
            .known_instance()
            .map_err(|e| StrategyError::InvalidPlan(e.to_string()))?;
        if self.schedule.is_some() && known.robots().len() == self.computed_for {
            return Ok(());
        }
        let solution = match self.cfg.opt_backend {
            OptBackend::Exact(solver) => opt_exact(&known, &solver)?,
            OptBackend::GreedyUpperBound => greedy_upper_bound(&known),
        };
        let opt = solution.makespan;
        self.schedule = Some(ReplaySchedule {
            solution,
            opt,
            offset: self.cfg.wait_factor * opt,
        });
        self.computed_for = known.robots().len();
        Ok(())
    }
}

impl Default for Patience {
    fn default() -> Self {
        Self::new(PatienceConfig::default())
    }
}

impl Strategy for Patience {
    fn name(&self) -> String {
        match self.cfg.opt_backend {
            OptBackend::Exact(_) => "patience".into(),
            OptBackend::GreedyUpperBound => "patience[greedy-upper-bound, no guarantee]".into(),
        }
    }

    fn on_release(&mut self, view: &SimView<'_>, _robot: RobotId) -> Result<Plan, StrategyError> {
        self.recompute(view)?;
        let schedule = self.schedule.as_ref().expect("schedule computed");
        let mut plan = Plan::new();
        for id in view.active_ids() {
            let legs = schedule.legs_for(view, id).ok_or_else(|| {
                StrategyError::InvalidPlan(format!("robot {id} missing from the schedule"))
            })?;
            plan.set(id, legs);
        }
        Ok(plan)
    }

    /// A woken robot takes up its role in the pending replay; no global replan.
    fn on_wake(&mut self, view: &SimView<'_>, robot: RobotId) -> Result<Option<Plan>, StrategyError> {
        let Some(schedule) = &self.schedule else {
            return Ok(None);
        };
        Ok(schedule.legs_for(view, robot).map(|legs| {
            let mut plan = Plan::new();
            plan.set(robot, legs);
            plan
        }))
    }
}
