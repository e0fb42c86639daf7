use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use super::SimError;
use crate::instance::{RobotId, RobotSpec};
use crate::metric::{MetricSpace, PathPlan, Point, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    Release,
    Wake,
    Arrival,
    Replan,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Release => "release",
            EventKind::Wake => "wake",
            EventKind::Arrival => "arrival",
            EventKind::Replan => "replan",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: EventKind,
    pub robot: RobotId,
    pub point: Point,
    /// For wake events, the robot whose contact caused the wake.
    pub by: Option<RobotId>,
}

/// A robot starts following `path` at time `start`. The record is in force
/// until the next record for the same robot.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionRecord {
    pub start: f64,
    pub path: PathPlan,
}

/// A wait leg that began after the time it was meant to end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateWait {
    pub robot: RobotId,
    pub scheduled: f64,
    pub started: f64,
}

/// Complete record of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    metric: Arc<MetricSpace>,
    robots: Vec<RobotSpec>,
    events: Vec<TraceEvent>,
    motions: Vec<Vec<MotionRecord>>,
    end_time: f64,
    makespan: f64,
    late_waits: Vec<LateWait>,
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("optimum must be positive, got {0}")]
pub struct NonpositiveOpt(pub f64);

/// Competitive ratio of a single run: `trace.makespan() / opt`.
pub fn ratio(trace: &Trace, opt: f64) -> Result<f64, NonpositiveOpt> {
    if !(opt > 0.0) {
        return Err(NonpositiveOpt(opt));
    }
    Ok(trace.makespan / opt)
}

impl Trace {
    pub(super) fn from_parts(
        metric: Arc<MetricSpace>,
        robots: Vec<RobotSpec>,
        events: Vec<TraceEvent>,
        motions: Vec<Vec<MotionRecord>>,
        end_time: f64,
        late_waits: Vec<LateWait>,
    ) -> Self {
        let makespan = events
            .iter()
            .filter(|e| e.kind == EventKind::Wake)
            .map(|e| e.time)
            .fold(0.0, f64::max);
        Self {
            metric,
            robots,
            events,
            motions,
            end_time,
            makespan,
            late_waits,
        }
    }

    pub fn metric(&self) -> &MetricSpace {
        &self.metric
    }

    /// Every robot of the run, including robots added while it was running.
    pub fn robots(&self) -> &[RobotSpec] {
        &self.robots
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn end_time(&self) -> f64 {
        self.end_time
    }

    /// Time of the last wake (0 if nobody was woken).
    pub fn makespan(&self) -> f64 {
        self.makespan
    }

    pub fn late_waits(&self) -> &[LateWait] {
        &self.late_waits
    }

    pub fn wake_times(&self) -> BTreeMap<RobotId, f64> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Wake)
            .map(|e| (e.robot, e.time))
            .collect()
    }

    /// Exact position of every robot at time `t`.
    pub fn positions_at(&self, t: f64) -> Result<BTreeMap<RobotId, Point>, SimError> {
        if !(t >= -EPS && t <= self.end_time + EPS) {
            return Err(SimError::TimeOutOfRange {
                time: t,
                end: self.end_time,
            });
        }
        Ok(self
            .robots
            .iter()
            .zip(&self.motions)
            .map(|(r, log)| (r.id, self.position_in(log, t)))
            .collect())
    }

    pub fn position_of(&self, robot: RobotId, t: f64) -> Option<Point> {
        let i = self.robots.iter().position(|r| r.id == robot)?;
        Some(self.position_in(&self.motions[i], t))
    }

    fn position_in(&self, log: &[MotionRecord], t: f64) -> Point {
        let k = log.partition_point(|m| m.start <= t).max(1) - 1;
        let rec = &log[k];
        rec.path.position_clamped(&self.metric, t - rec.start)
    }

    /// `time,event,robot,location` rows, one per event.
    pub fn events_csv(&self) -> String {
        let mut out = String::from("time,event,robot,location\n");
        for e in &self.events {
            let _ = writeln!(
                out,
                "{:.9},{},{},{}",
                e.time,
                e.kind.as_str(),
                e.robot,
                self.metric.format_point(e.point)
            );
        }
        out
    }

    /// `time,robot,location` rows sampled every `dt` from 0 to the end of the run.
    pub fn positions_csv(&self, dt: f64) -> String {
        let mut out = String::from("time,robot,location\n");
        if !(dt > 0.0) {
            return out;
        }
        let steps = (self.end_time / dt).floor() as usize;
        for k in 0..=steps {
            let t = (k as f64 * dt).min(self.end_time);
            for (r, log) in self.robots.iter().zip(&self.motions) {
                let p = self.position_in(log, t);
                let _ = writeln!(out, "{:.9},{},{}", t, r.id, self.metric.format_point(p));
            }
        }
        out
    }
}
