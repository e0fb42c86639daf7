//! Event-driven continuous-time simulation of online freeze-tag.
//!
//! Time advances from event to event: releases, contact wakes, leg
//! completions. Contact times are computed analytically per movement leg, so
//! wake times are exact up to floating point.

mod trace;

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::instance::{Instance, InstanceError, RobotId, RobotSpec};
use crate::metric::{MetricError, MetricSpace, PathPlan, Point, EPS};
use crate::solver::SolverError;

pub use trace::{ratio, EventKind, LateWait, MotionRecord, NonpositiveOpt, Trace, TraceEvent};

/// Events closer than this are treated as simultaneous.
pub(crate) const TIME_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Simulation horizon; released robots still frozen at this time are an error.
    pub max_time: f64,
    /// Contact radius: an active robot this close to a released frozen robot wakes it.
    pub contact_tol: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            max_time: 100.0,
            contact_tol: EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Leg {
    GoTo(Point),
    WaitUntil(f64),
}

/// New leg lists for some robots. Robots absent from the plan keep their
/// current legs; an empty list stops the robot where it is.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Plan {
    pub legs: BTreeMap<RobotId, Vec<Leg>>,
}

impl Plan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, robot: RobotId, legs: Vec<Leg>) -> &mut Self {
        self.legs.insert(robot, legs);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.legs.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("offline solver failed: {0}")]
    OptBackend(#[from] SolverError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("horizon {horizon} reached with robots {} never woken", list_ids(unwoken))]
    HorizonExceeded { horizon: f64, unwoken: Vec<RobotId> },
    #[error("strategy error: {0}")]
    Strategy(#[from] StrategyError),
    #[error("time {time} outside the trace range [0, {end}]")]
    TimeOutOfRange { time: f64, end: f64 },
    #[error("cannot add robot {id}: {reason}")]
    BadInjection { id: RobotId, reason: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn list_ids(ids: &[RobotId]) -> String {
    ids.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(", ")
}

/// An online strategy: decides how active robots move, seeing only robots
/// that have been released.
pub trait Strategy {
    fn name(&self) -> String;

    fn on_start(&mut self, _view: &SimView<'_>) -> Result<Plan, StrategyError> {
        Ok(Plan::new())
    }

    fn on_release(&mut self, view: &SimView<'_>, robot: RobotId) -> Result<Plan, StrategyError>;

    fn on_wake(
        &mut self,
        view: &SimView<'_>,
        robot: RobotId,
    ) -> Result<Option<Plan>, StrategyError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobotStatus {
    Unreleased,
    /// Released but not yet woken.
    Frozen,
    Active,
}

#[derive(Debug, Clone)]
enum Activity {
    Idle(Point),
    Moving { path: PathPlan, depart: f64 },
    Waiting { at: Point, until: f64 },
}

#[derive(Debug, Clone)]
struct RobotState {
    spec: RobotSpec,
    status: RobotStatus,
    activity: Activity,
    legs: VecDeque<Leg>,
    motions: Vec<MotionRecord>,
}

impl RobotState {
    fn position(&self, m: &MetricSpace, t: f64) -> Point {
        match &self.activity {
            Activity::Idle(p) | Activity::Waiting { at: p, .. } => *p,
            Activity::Moving { path, depart } => path.position_clamped(m, t - depart),
        }
    }

    fn is_idle(&self) -> bool {
        matches!(self.activity, Activity::Idle(_)) && self.legs.is_empty()
    }
}

#[derive(Debug, Clone)]
struct SimState {
    metric: Arc<MetricSpace>,
    opts: SimOptions,
    clock: f64,
    robots: Vec<RobotState>,
    index: BTreeMap<RobotId, usize>,
    events: Vec<TraceEvent>,
    late_waits: Vec<LateWait>,
}

/// Read-only view of the simulation handed to strategies. Unreleased
/// robots are invisible.
pub struct SimView<'a> {
    state: &'a SimState,
}

impl<'a> SimView<'a> {
    pub fn clock(&self) -> f64 {
        self.state.clock
    }

    pub fn metric(&self) -> &MetricSpace {
        &self.state.metric
    }

    fn visible(&self) -> impl Iterator<Item = &'a RobotState> + 'a {
        self.state
            .robots
            .iter()
            .filter(|r| r.status != RobotStatus::Unreleased)
    }

    /// Released robots (including initially active ones), in id order.
    pub fn robots(&self) -> Vec<&'a RobotSpec> {
        let mut v: Vec<_> = self.visible().map(|r| &r.spec).collect();
        v.sort_by_key(|r| r.id);
        v
    }

    fn get(&self, id: RobotId) -> Option<&'a RobotState> {
        self.state
            .index
            .get(&id)
            .map(|&i| &self.state.robots[i])
            .filter(|r| r.status != RobotStatus::Unreleased)
    }

    pub fn status(&self, id: RobotId) -> Option<RobotStatus> {
        self.get(id).map(|r| r.status)
    }

    pub fn home(&self, id: RobotId) -> Option<Point> {
        self.get(id).map(|r| r.spec.home)
    }

    pub fn position(&self, id: RobotId) -> Option<Point> {
        self.get(id)
            .map(|r| r.position(&self.state.metric, self.state.clock))
    }

    /// True if the robot is active, stationary and has no legs left.
    pub fn is_idle(&self, id: RobotId) -> bool {
        self.get(id)
            .is_some_and(|r| r.status == RobotStatus::Active && r.is_idle())
    }

    pub fn active_ids(&self) -> Vec<RobotId> {
        self.ids_with(RobotStatus::Active)
    }

    /// Released robots that are still frozen.
    pub fn frozen_ids(&self) -> Vec<RobotId> {
        self.ids_with(RobotStatus::Frozen)
    }

    fn ids_with(&self, status: RobotStatus) -> Vec<RobotId> {
        let mut v: Vec<_> = self
            .visible()
            .filter(|r| r.status == status)
            .map(|r| r.spec.id)
            .collect();
        v.sort();
        v
    }

    /// The instance revealed so far: every released robot with its original
    /// home and release time.
    pub fn known_instance(&self) -> Result<Instance, InstanceError> {
        Instance::from_unsorted(
            Arc::clone(&self.state.metric),
            self.visible().map(|r| r.spec.clone()).collect(),
        )
    }
}

/// A running simulation. Use [`simulate`] for a complete run; the stepping
/// API (`run_until`, `inject`, `finish`) serves interactive adversaries.
pub struct Simulation<'s> {
    state: SimState,
    strategy: &'s mut dyn Strategy,
}

/// Runs `strategy` on `inst` to completion.
pub fn simulate(
    inst: &Instance,
    strategy: &mut dyn Strategy,
    opts: SimOptions,
) -> Result<Trace, SimError> {
    Simulation::new(inst, strategy, opts)?.finish()
}

impl<'s> Simulation<'s> {
    pub fn new(
        inst: &Instance,
        strategy: &'s mut dyn Strategy,
        opts: SimOptions,
    ) -> Result<Self, SimError> {
        inst.validate()?;
        let robots: Vec<RobotState> = inst
            .robots()
            .iter()
            .map(|spec| RobotState {
                status: if spec.initially_active {
                    RobotStatus::Active
                } else {
                    RobotStatus::Unreleased
                },
                activity: Activity::Idle(spec.home),
                legs: VecDeque::new(),
                motions: vec![MotionRecord {
                    start: 0.0,
                    path: PathPlan::stationary(spec.home),
                }],
                spec: spec.clone(),
            })
            .collect();
        let index = robots
            .iter()
            .enumerate()
            .map(|(i, r)| (r.spec.id, i))
            .collect();
        let mut sim = Self {
            state: SimState {
                metric: Arc::clone(inst.metric_arc()),
                opts,
                clock: 0.0,
                robots,
                index,
                events: Vec::new(),
                late_waits: Vec::new(),
            },
            strategy,
        };
        let plan = sim.strategy.on_start(&SimView { state: &sim.state })?;
        sim.apply_plan(plan)?;
        Ok(sim)
    }

    pub fn clock(&self) -> f64 {
        self.state.clock
    }

    pub fn view(&self) -> SimView<'_> {
        SimView { state: &self.state }
    }

    pub fn metric(&self) -> &MetricSpace {
        &self.state.metric
    }

    /// Current position of every robot, including unreleased ones (at home).
    pub fn positions(&self) -> BTreeMap<RobotId, Point> {
        let m = &self.state.metric;
        self.state
            .robots
            .iter()
            .map(|r| (r.spec.id, r.position(m, self.state.clock)))
            .collect()
    }

    pub fn status(&self, id: RobotId) -> Option<RobotStatus> {
        self.state.index.get(&id).map(|&i| self.state.robots[i].status)
    }

    /// Adds a frozen robot to the running instance. Its release must not
    /// precede the current clock.
    pub fn inject(&mut self, spec: RobotSpec) -> Result<(), SimError> {
        let bad = |reason: &str| SimError::BadInjection {
            id: spec.id,
            reason: reason.to_string(),
        };
        if self.state.index.contains_key(&spec.id) {
            return Err(bad("duplicate id"));
        }
        if spec.initially_active {
            return Err(bad("injected robots must start frozen"));
        }
        if !(spec.release >= self.state.clock - TIME_TIE) || !spec.release.is_finite() {
            return Err(bad("release precedes the current time"));
        }
        let home = self
            .state
            .metric
            .check_point(spec.home)
            .map_err(|e: MetricError| bad(&e.to_string()))?;
        let spec = RobotSpec { home, ..spec };
        self.state.index.insert(spec.id, self.state.robots.len());
        self.state.robots.push(RobotState {
            status: RobotStatus::Unreleased,
            activity: Activity::Idle(home),
            legs: VecDeque::new(),
            motions: vec![MotionRecord {
                start: 0.0,
                path: PathPlan::stationary(home),
            }],
            spec,
        });
        Ok(())
    }

    /// Time of the next pending event, if any.
    pub fn next_event_time(&self) -> Option<f64> {
        let st = &self.state;
        let m = &st.metric;
        let mut next = f64::INFINITY;
        for r in &st.robots {
            match (&r.status, &r.activity) {
                (RobotStatus::Unreleased, _) => next = next.min(r.spec.release),
                (RobotStatus::Active, Activity::Waiting { until, .. }) => next = next.min(*until),
                (RobotStatus::Active, Activity::Moving { path, depart }) => {
                    next = next.min(depart + path.total_length());
                    for f in st.robots.iter().filter(|f| f.status == RobotStatus::Frozen) {
                        if let Some(t) =
                            contact_time(m, path, *depart, f.spec.home, st.opts.contact_tol, st.clock)
                        {
                            next = next.min(t);
                        }
                    }
                }
                _ => {}
            }
        }
        next.is_finite().then_some(next.max(st.clock))
    }

    /// Processes every event up to and including time `t`, then sets the clock to `t`.
    pub fn run_until(&mut self, t: f64) -> Result<(), SimError> {
        while let Some(te) = self.next_event_time() {
            if te > t + TIME_TIE {
                break;
            }
            self.process_instant(te)?;
        }
        self.state.clock = self.state.clock.max(t);
        Ok(())
    }

    /// Runs until no events remain (or the horizon) and returns the trace.
    pub fn finish(mut self) -> Result<Trace, SimError> {
        let horizon = self.state.opts.max_time;
        while let Some(te) = self.next_event_time() {
            if te > horizon {
                break;
            }
            self.process_instant(te)?;
        }
        let unwoken: Vec<RobotId> = self
            .state
            .robots
            .iter()
            .filter(|r| r.status != RobotStatus::Active)
            .map(|r| r.spec.id)
            .collect();
        if !unwoken.is_empty() {
            return Err(SimError::HorizonExceeded { horizon, unwoken });
        }
        let still_moving = self.next_event_time().is_some();
        let end = if still_moving {
            horizon
        } else {
            self.state.clock
        };
        Ok(Trace::from_parts(
            Arc::clone(&self.state.metric),
            self.state.robots.iter().map(|r| r.spec.clone()).collect(),
            self.state.events,
            self.state.robots.into_iter().map(|r| r.motions).collect(),
            end,
            self.state.late_waits,
        ))
    }

    fn process_instant(&mut self, te: f64) -> Result<(), SimError> {
        self.state.clock = self.state.clock.max(te);
        let now = self.state.clock;

        let mut released = Vec::new();
        for r in self.state.robots.iter_mut() {
            if r.status == RobotStatus::Unreleased && r.spec.release <= now + TIME_TIE {
                r.status = RobotStatus::Frozen;
                released.push(r.spec.id);
            }
        }
        released.sort();
        for &id in &released {
            let home = self.robot(id).spec.home;
            self.push_event(EventKind::Release, id, home, None);
        }

        let woken = self.wake_contacts();

        // Leg completions.
        let mut done: Vec<usize> = (0..self.state.robots.len())
            .filter(|&i| {
                let r = &self.state.robots[i];
                r.status == RobotStatus::Active
                    && match &r.activity {
                        Activity::Moving { path, depart } => {
                            depart + path.total_length() <= now + TIME_TIE
                        }
                        Activity::Waiting { until, .. } => *until <= now + TIME_TIE,
                        Activity::Idle(_) => false,
                    }
            })
            .collect();
        done.sort_by_key(|&i| self.state.robots[i].spec.id);
        for i in done {
            let m = Arc::clone(&self.state.metric);
            let r = &self.state.robots[i];
            let (id, at, arrived) = match &r.activity {
                Activity::Moving { path, .. } => (r.spec.id, path.last(&m), true),
                Activity::Waiting { at, .. } | Activity::Idle(at) => (r.spec.id, *at, false),
            };
            if arrived {
                self.push_event(EventKind::Arrival, id, at, None);
            }
            self.state.robots[i].activity = Activity::Idle(at);
            self.start_legs(i);
        }

        for id in released {
            let plan = self
                .strategy
                .on_release(&SimView { state: &self.state }, id)?;
            self.apply_plan(plan)?;
        }
        for id in woken {
            if let Some(plan) = self.strategy.on_wake(&SimView { state: &self.state }, id)? {
                self.apply_plan(plan)?;
            }
        }
        Ok(())
    }

    /// Wakes every released frozen robot that some active robot currently
    /// touches. Returns the woken ids in wake order.
    fn wake_contacts(&mut self) -> Vec<RobotId> {
        let now = self.state.clock;
        let tol = self.state.opts.contact_tol;
        let m = Arc::clone(&self.state.metric);
        let mut woken = Vec::new();
        loop {
            let mut frozen: Vec<(RobotId, usize)> = self
                .state
                .robots
                .iter()
                .enumerate()
                .filter(|(_, r)| r.status == RobotStatus::Frozen)
                .map(|(i, r)| (r.spec.id, i))
                .collect();
            frozen.sort();
            let mut changed = false;
            for (id, i) in frozen {
                let home = self.state.robots[i].spec.home;
                let waker = self.touching(&m, home, now, tol);
                if let Some(w) = waker {
                    let r = &mut self.state.robots[i];
                    r.status = RobotStatus::Active;
                    r.activity = Activity::Idle(home);
                    self.push_event(EventKind::Wake, id, home, Some(w));
                    woken.push(id);
                    changed = true;
                }
            }
            if !changed {
                return woken;
            }
        }
    }

    /// Lowest-id active robot touching `target` at time `now`, either by
    /// proximity or by a scheduled contact falling on this instant.
    fn touching(&self, m: &MetricSpace, target: Point, now: f64, tol: f64) -> Option<RobotId> {
        let mut best: Option<RobotId> = None;
        for r in self.state.robots.iter().filter(|r| r.status == RobotStatus::Active) {
            let near = m.distance_unchecked(r.position(m, now), target) <= tol + TIME_TIE;
            let scheduled = match &r.activity {
                Activity::Moving { path, depart } => contact_time(m, path, *depart, target, tol, now)
                    .is_some_and(|t| t <= now + TIME_TIE),
                _ => false,
            };
            if (near || scheduled) && best.is_none_or(|b| r.spec.id < b) {
                best = Some(r.spec.id);
            }
        }
        best
    }

    fn robot(&self, id: RobotId) -> &RobotState {
        &self.state.robots[self.state.index[&id]]
    }

    fn push_event(&mut self, kind: EventKind, robot: RobotId, point: Point, by: Option<RobotId>) {
        self.state.events.push(TraceEvent {
            time: self.state.clock,
            kind,
            robot,
            point,
            by,
        });
    }

    fn apply_plan(&mut self, plan: Plan) -> Result<(), SimError> {
        let now = self.state.clock;
        for (id, legs) in plan.legs {
            let Some(&i) = self.state.index.get(&id) else {
                return Err(StrategyError::InvalidPlan(format!("unknown robot {id}")).into());
            };
            if self.state.robots[i].status != RobotStatus::Active {
                return Err(
                    StrategyError::InvalidPlan(format!("robot {id} is not active")).into(),
                );
            }
            let mut last_wait = f64::NEG_INFINITY;
            let mut checked = VecDeque::with_capacity(legs.len());
            for leg in legs {
                match leg {
                    Leg::GoTo(p) => {
                        let p = self.state.metric.check_point(p).map_err(|e| {
                            StrategyError::InvalidPlan(format!("robot {id}: {e}"))
                        })?;
                        checked.push_back(Leg::GoTo(p));
                    }
                    Leg::WaitUntil(t) => {
                        if !t.is_finite() || t < last_wait {
                            return Err(StrategyError::InvalidPlan(format!(
                                "robot {id}: wait times must be finite and nondecreasing"
                            ))
                            .into());
                        }
                        last_wait = t;
                        checked.push_back(Leg::WaitUntil(t));
                    }
                }
            }
            let m = Arc::clone(&self.state.metric);
            let r = &mut self.state.robots[i];
            let here = r.position(&m, now);
            let was_moving = matches!(r.activity, Activity::Moving { .. });
            r.activity = Activity::Idle(here);
            r.legs = checked;
            if was_moving {
                r.motions.push(MotionRecord {
                    start: now,
                    path: PathPlan::stationary(here),
                });
            }
            self.push_event(EventKind::Replan, id, here, None);
            self.start_legs(i);
        }
        Ok(())
    }

    /// Starts the robot's next leg that takes positive time, skipping legs
    /// that are already complete.
    fn start_legs(&mut self, i: usize) {
        let now = self.state.clock;
        let m = Arc::clone(&self.state.metric);
        let r = &mut self.state.robots[i];
        let here = r.position(&m, now);
        while let Some(leg) = r.legs.pop_front() {
            match leg {
                Leg::GoTo(target) => {
                    let path = m
                        .shortest_path(here, target)
                        .expect("plan points validated");
                    if path.total_length() > 0.0 {
                        r.motions.push(MotionRecord {
                            start: now,
                            path: path.clone(),
                        });
                        r.activity = Activity::Moving { path, depart: now };
                        return;
                    }
                }
                Leg::WaitUntil(until) => {
                    if until > now + TIME_TIE {
                        r.activity = Activity::Waiting { at: here, until };
                        return;
                    }
                    if until < now - EPS {
                        self.state.late_waits.push(LateWait {
                            robot: r.spec.id,
                            scheduled: until,
                            started: now,
                        });
                    }
                }
            }
        }
        r.activity = Activity::Idle(here);
    }
}

/// First time at or after `not_before` that a mover on `path` touches
/// `target`. Detection uses radius `tol`; when the mover actually passes
/// through the target within `tol` of entering that radius, the exact
/// passage time is returned instead.
fn contact_time(
    m: &MetricSpace,
    path: &PathPlan,
    depart: f64,
    target: Point,
    tol: f64,
    not_before: f64,
) -> Option<f64> {
    let t0 = path.crossing_time_from(m, depart, target, tol, not_before)?;
    match path.crossing_time_from(m, depart, target, 0.0, t0) {
        Some(t1) if t1 <= t0 + tol + TIME_TIE => Some(t1),
        _ => Some(t0),
    }
}
