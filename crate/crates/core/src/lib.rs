//! Online time-dependent freeze-tag on graph-induced metric spaces.
//!
//! Active robots move at unit speed and wake frozen robots by touching them;
//! frozen robots become known only at their release time. The crate holds the
//! metric, the instance model, an exact offline solver, an event-driven
//! simulator, online strategies and the lower-bound adversary.

pub mod adversary;
pub mod instance;
pub mod metric;
pub mod random;
pub mod sim;
pub mod solver;
pub mod strategy;

pub use adversary::{
    build_metric_k, build_tree, r_bound, robot_count_check, run_adversary, sigma_requests,
    AdversaryCase, AdversaryError, AdversaryOptions, AdversaryReport, LowerBoundMetric, TreeSpec,
};
pub use instance::{Instance, InstanceError, RobotId, RobotSpec};
pub use metric::{EdgeId, MetricError, MetricSpace, PathPlan, Point, VertexId, EPS};
pub use random::{random_instance, RandomConfig};
pub use sim::{
    ratio, simulate, Leg, Plan, SimError, SimOptions, SimView, Simulation, Strategy,
    StrategyError, Trace,
};
pub use solver::{
    evaluate, greedy_upper_bound, opt_bruteforce, opt_exact, OfflineSolution, SolverConfig,
    SolverError,
};
pub use strategy::{strategy_by_name, GreedyDispatch, Patience, PatienceConfig, StrategyOptions};
