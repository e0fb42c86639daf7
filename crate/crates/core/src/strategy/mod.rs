//! Online strategies: the patience algorithm and a nearest-target greedy baseline.

mod greedy;
mod patience;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::RobotId;
use crate::sim::{Plan, SimView, Strategy, StrategyError};
use crate::solver::SolverConfig;

pub use greedy::GreedyDispatch;
pub use patience::{OptBackend, Patience, PatienceConfig, ReplaySchedule};

/// Names accepted by [`strategy_by_name`].
pub const STRATEGY_NAMES: &[&str] = &["patience", "greedy"];

/// Strategy options as given on the command line or in a JSON options object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyOptions {
    pub wait_factor: f64,
    /// `"exact"` or `"greedy-upper-bound"`.
    pub opt_backend: String,
    pub solver_cap: usize,
}

impl Default for StrategyOptions {
    fn default() -> Self {
        Self {
            wait_factor: std::f64::consts::SQRT_2,
            opt_backend: "exact".into(),
            solver_cap: SolverConfig::from_env().frozen_cap,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyConfigError {
    #[error("unknown strategy `{0}` (expected one of: patience, greedy)")]
    UnknownStrategy(String),
    #[error("unknown opt backend `{0}` (expected exact or greedy-upper-bound)")]
    UnknownBackend(String),
    #[error("wait factor must be at least 1, got {0}")]
    WaitFactorTooSmall(f64),
}

/// Builds a strategy from its name.
pub fn strategy_by_name(
    name: &str,
    opts: &StrategyOptions,
) -> Result<Box<dyn Strategy>, StrategyConfigError> {
    match name {
        "patience" => {
            let backend = match opts.opt_backend.as_str() {
                "exact" => OptBackend::Exact(SolverConfig {
                    frozen_cap: opts.solver_cap,
                }),
                "greedy-upper-bound" | "greedy" => OptBackend::GreedyUpperBound,
                other => return Err(StrategyConfigError::UnknownBackend(other.into())),
            };
            let cfg = PatienceConfig::new(opts.wait_factor, backend)?;
            Ok(Box::new(Patience::new(cfg)))
        }
        "greedy" => Ok(Box::new(GreedyDispatch::new())),
        other => Err(StrategyConfigError::UnknownStrategy(other.into())),
    }
}

/// Executes a fixed plan given at start and never reacts to events.
#[derive(Debug, Clone, Default)]
pub struct Scripted {
    start: Plan,
}

impl Scripted {
    pub fn new(start: Plan) -> Self {
        Self { start }
    }
}

impl Strategy for Scripted {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn on_start(&mut self, _view: &SimView<'_>) -> Result<Plan, StrategyError> {
        Ok(std::mem::take(&mut self.start))
    }

    fn on_release(&mut self, _view: &SimView<'_>, _robot: RobotId) -> Result<Plan, StrategyError> {
        Ok(Plan::new())
    }

    fn on_wake(&mut self, _view: &SimView<'_>, _robot: RobotId) -> Result<Option<Plan>, StrategyError> {
        Ok(None)
    }
}
