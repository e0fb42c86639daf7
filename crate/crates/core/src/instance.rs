//! Time-dependent freeze-tag instances and their JSON form.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{EdgeId, GraphSpec, MetricError, MetricSpace, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotId(pub u32);

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One robot of an instance: where it sleeps (or starts) and when it is revealed.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotSpec {
    pub id: RobotId,
    pub home: Point,
    pub release: f64,
    pub initially_active: bool,
}

impl RobotSpec {
    pub fn active(id: u32, home: Point) -> Self {
        Self {
            id: RobotId(id),
            home,
            release: 0.0,
            initially_active: true,
        }
    }

    pub fn frozen(id: u32, home: Point, release: f64) -> Self {
        Self {
            id: RobotId(id),
            home,
            release,
            initially_active: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("instance has no initially active robot")]
    NoActiveRobot,
    #[error("robots are not sorted by release (active robots first) at position {0}")]
    UnsortedReleases(usize),
    #[error("robot {id} has an invalid home: {source}")]
    InvalidHome { id: RobotId, source: MetricError },
    #[error("initially active robot {0} has a positive release time")]
    ActiveWithPositiveRelease(RobotId),
    #[error("robot {0} has a negative or non-finite release time")]
    BadRelease(RobotId),
    #[error("duplicate robot id {0}")]
    DuplicateId(RobotId),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A validated instance. Robots are sorted by release with the initially
/// active robots first.
#[derive(Debug, Clone)]
pub struct Instance {
    metric: Arc<MetricSpace>,
    robots: Vec<RobotSpec>,
}

impl Instance {
    pub fn new(metric: Arc<MetricSpace>, robots: Vec<RobotSpec>) -> Result<Self, InstanceError> {
        let inst = Self { metric, robots };
        inst.validate()?;
        Ok(inst)
    }

    /// Sorts `robots` into canonical order (active first, then by release,
    /// then by id) before validating.
    pub fn from_unsorted(
        metric: Arc<MetricSpace>,
        mut robots: Vec<RobotSpec>,
    ) -> Result<Self, InstanceError> {
        robots.sort_by(|a, b| {
            b.initially_active
                .cmp(&a.initially_active)
                .then(a.release.total_cmp(&b.release))
                .then(a.id.cmp(&b.id))
        });
        Self::new(metric, robots)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let mut seen = HashSet::new();
        for r in &self.robots {
            if !seen.insert(r.id) {
                return Err(InstanceError::DuplicateId(r.id));
            }
            if !(r.release >= 0.0) || !r.release.is_finite() {
                return Err(InstanceError::BadRelease(r.id));
            }
            if r.initially_active && r.release != 0.0 {
                return Err(InstanceError::ActiveWithPositiveRelease(r.id));
            }
            self.metric
                .check_point(r.home)
                .map_err(|source| InstanceError::InvalidHome { id: r.id, source })?;
        }
        if !self.robots.iter().any(|r| r.initially_active) {
            return Err(InstanceError::NoActiveRobot);
        }
        for (i, w) in self.robots.windows(2).enumerate() {
            let frozen_then_active = !w[0].initially_active && w[1].initially_active;
            if w[1].release < w[0].release || frozen_then_active {
                return Err(InstanceError::UnsortedReleases(i + 1));
            }
        }
        Ok(())
    }

    pub fn metric(&self) -> &MetricSpace {
        &self.metric
    }

    pub fn metric_arc(&self) -> &Arc<MetricSpace> {
        &self.metric
    }

    pub fn robots(&self) -> &[RobotSpec] {
        &self.robots
    }

    pub fn robot(&self, id: RobotId) -> Option<&RobotSpec> {
        self.robots.iter().find(|r| r.id == id)
    }

    pub fn starters(&self) -> impl Iterator<Item = &RobotSpec> {
        self.robots.iter().filter(|r| r.initially_active)
    }

    pub fn frozen(&self) -> impl Iterator<Item = &RobotSpec> {
        self.robots.iter().filter(|r| !r.initially_active)
    }

    pub fn frozen_count(&self) -> usize {
        self.frozen().count()
    }

    pub fn last_release(&self) -> f64 {
        self.robots.iter().map(|r| r.release).fold(0.0, f64::max)
    }

    /// The robots revealed by `time`, i.e. those with `release <= time`.
    pub fn truncate(&self, time: f64) -> Instance {
        Instance {
            metric: Arc::clone(&self.metric),
            robots: self
                .robots
                .iter()
                .filter(|r| r.release <= time)
                .cloned()
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            metric: self.metric.to_spec(),
            robots: self
                .robots
                .iter()
                .map(|r| RobotFile {
                    id: r.id.0,
                    point: PointFile::from_point(&self.metric, r.home),
                    release: r.release,
                    active: r.initially_active,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Instance, InstanceError> {
        let file: InstanceFile = parse_json(text)?;
        let metric = Arc::new(MetricSpace::from_spec(&file.metric)?);
        let robots = file
            .robots
            .iter()
            .map(|r| {
                let home = r.point.to_point(&metric).map_err(|source| InstanceError::InvalidHome {
                    id: RobotId(r.id),
                    source,
                })?;
                Ok(RobotSpec {
                    id: RobotId(r.id),
                    home,
                    release: r.release,
                    initially_active: r.active,
                })
            })
            .collect::<Result<Vec<_>, InstanceError>>()?;
        Instance::new(metric, robots)
    }
}

/// Deserializes JSON, separating syntax errors from shape errors and
/// reporting the offending field path for the latter.
pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, InstanceError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => InstanceError::Schema {
                path,
                message: inner.to_string(),
            },
            _ => InstanceError::Parse(inner.to_string()),
        }
    })?;
    de.end().map_err(|e| InstanceError::Parse(e.to_string()))?;
    Ok(value)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    metric: GraphSpec,
    robots: Vec<RobotFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotFile {
    id: u32,
    point: PointFile,
    release: f64,
    active: bool,
}

/// `{"vertex": "p0"}` or `{"edge": {"index": 3, "offset": 0.5}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum PointFile {
    Vertex(String),
    Edge(EdgePosition),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgePosition {
    pub index: usize,
    pub offset: f64,
}

impl PointFile {
    pub fn from_point(m: &MetricSpace, p: Point) -> Self {
        match p {
            Point::Vertex(v) => PointFile::Vertex(m.vertex_name(v).to_string()),
            Point::OnEdge { edge, offset } => PointFile::Edge(EdgePosition {
                index: edge.0,
                offset,
            }),
        }
    }

    pub fn to_point(&self, m: &MetricSpace) -> Result<Point, MetricError> {
        match self {
            PointFile::Vertex(name) => m
                .vertex(name)
                .map(Point::Vertex)
                .ok_or_else(|| MetricError::UnknownVertex(name.clone())),
            PointFile::Edge(EdgePosition { index, offset }) => {
                m.point_on_edge(EdgeId(*index), *offset)
            }
        }
    }
}
