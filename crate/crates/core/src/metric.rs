//! Continuous metric spaces induced by positively weighted undirected graphs.
//!
//! A point is either a vertex or a position inside an edge, measured as an
//! offset from the edge's `u` endpoint. Travel happens along edges at unit
//! speed, so the distance between two points is the length of the shortest
//! walk through the graph that may start and end in edge interiors.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used for every floating point comparison in the crate.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub length: f64,
}

impl Edge {
    fn endpoint_offset(&self, x: VertexId) -> f64 {
        if x == self.u {
            0.0
        } else {
            self.length
        }
    }

    fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// A location in the metric space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Vertex(VertexId),
    /// `offset` is measured from the edge's `u` endpoint.
    OnEdge { edge: EdgeId, offset: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("metric space needs at least one vertex")]
    NoVertices,
    #[error("duplicate vertex name `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("edge {index} has nonpositive length {length}")]
    NonpositiveEdgeLength { index: usize, length: f64 },
    #[error("edge {index} is a self-loop")]
    SelfLoop { index: usize },
    #[error("graph is disconnected: `{to}` is unreachable from `{from}`")]
    DisconnectedGraph { from: String, to: String },
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("elapsed {elapsed} outside [0, {total}]")]
    ElapsedOutOfRange { elapsed: f64, total: f64 },
    #[error("waypoints {0} and {1} do not lie on a common edge")]
    NotAdjacent(usize, usize),
}

/// Serialized form of a graph: `{"vertices": [...], "edges": [{"u","v","length"}]}`.
/// Edge order defines edge indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub u: String,
    pub v: String,
    pub length: f64,
}

/// Immutable metric space with all-pairs vertex distances computed at build time.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    names: Vec<String>,
    by_name: HashMap<String, VertexId>,
    edges: Vec<Edge>,
    incident: Vec<Vec<EdgeId>>,
    /// Row-major `n * n` table of vertex distances.
    dist: Vec<f64>,
    /// `via[s * n + v]` is the last edge on a shortest path from `s` to `v`.
    via: Vec<Option<EdgeId>>,
}

#[derive(Clone, Copy)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    // reversed for a min-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl MetricSpace {
    /// Builds the metric from vertex names and `(u, v, length)` index triples.
    pub fn new(names: Vec<String>, edges: Vec<Edge>) -> Result<Self, MetricError> {
        if names.is_empty() {
            return Err(MetricError::NoVertices);
        }
        let n = names.len();
        let mut by_name = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if by_name.insert(name.clone(), VertexId(i)).is_some() {
                return Err(MetricError::DuplicateVertex(name.clone()));
            }
        }
        let mut incident = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            for x in [e.u, e.v] {
                if x.0 >= n {
                    return Err(MetricError::UnknownVertex(format!("#{}", x.0)));
                }
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(MetricError::NonpositiveEdgeLength {
                    index: i,
                    length: e.length,
                });
            }
            if e.u == e.v {
                return Err(MetricError::SelfLoop { index: i });
            }
            incident[e.u.0].push(EdgeId(i));
            incident[e.v.0].push(EdgeId(i));
        }

        let mut dist = vec![f64::INFINITY; n * n];
        let mut via = vec![None; n * n];
        for s in 0..n {
            let row = &mut dist[s * n..(s + 1) * n];
            let via_row = &mut via[s * n..(s + 1) * n];
            row[s] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(HeapItem { dist: 0.0, vertex: s });
            while let Some(HeapItem { dist: d, vertex: x }) = heap.pop() {
                if d > row[x] {
                    continue;
                }
                for &eid in &incident[x] {
                    let e = &edges[eid.0];
                    let y = e.other(VertexId(x)).0;
                    let nd = d + e.length;
                    if nd < row[y] {
                        row[y] = nd;
                        via_row[y] = Some(eid);
                        heap.push(HeapItem { dist: nd, vertex: y });
                    }
                }
            }
            if let Some(y) = row.iter().position(|d| !d.is_finite()) {
                return Err(MetricError::DisconnectedGraph {
                    from: names[s].clone(),
                    to: names[y].clone(),
                });
            }
        }

        Ok(Self {
            names,
            by_name,
            edges,
            incident,
            dist,
            via,
        })
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<Self, MetricError> {
        let mut lookup = HashMap::new();
        for (i, name) in spec.vertices.iter().enumerate() {
            lookup.entry(name.as_str()).or_insert(VertexId(i));
        }
        let find = |name: &str| {
            lookup
                .get(name)
                .copied()
                .ok_or_else(|| MetricError::UnknownVertex(name.to_string()))
        };
        let edges = spec
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    u: find(&e.u)?,
                    v: find(&e.v)?,
                    length: e.length,
                })
            })
            .collect::<Result<Vec<_>, MetricError>>()?;
        Self::new(spec.vertices.clone(), edges)
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: self.names.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    u: self.names[e.u.0].clone(),
                    v: self.names[e.v.0].clone(),
                    length: e.length,
                })
                .collect(),
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    pub fn incident_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v.0]
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.names[v.0]
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.by_name.get(name).copied()
    }

    /// Shortest-path distance between two vertices.
    pub fn vertex_distance(&self, a: VertexId, b: VertexId) -> f64 {
        self.dist[a.0 * self.names.len() + b.0]
    }

    /// Builds a validated, normalized point on an edge.
    pub fn point_on_edge(&self, edge: EdgeId, offset: f64) -> Result<Point, MetricError> {
        self.check_point(Point::OnEdge { edge, offset })
    }

    /// Validates `p` and returns its normalized form: offsets within [`EPS`]
    /// of an endpoint collapse to that vertex.
    pub fn check_point(&self, p: Point) -> Result<Point, MetricError> {
        match p {
            Point::Vertex(v) if v.0 < self.names.len() => Ok(p),
            Point::Vertex(v) => Err(MetricError::InvalidPoint(format!("vertex #{}", v.0))),
            Point::OnEdge { edge, offset } => {
                let e = self
                    .edges
                    .get(edge.0)
                    .ok_or_else(|| MetricError::InvalidPoint(format!("edge #{}", edge.0)))?;
                if !offset.is_finite() || offset < -EPS || offset > e.length + EPS {
                    return Err(MetricError::InvalidPoint(format!(
                        "offset {offset} outside edge #{} of length {}",
                        edge.0, e.length
                    )));
                }
                Ok(self.normalize(edge, offset))
            }
        }
    }

    fn normalize(&self, edge: EdgeId, offset: f64) -> Point {
        let e = &self.edges[edge.0];
        if offset <= EPS {
            Point::Vertex(e.u)
        } else if offset >= e.length - EPS {
            Point::Vertex(e.v)
        } else {
            Point::OnEdge { edge, offset }
        }
    }

    /// The (at most two) vertices through which a path must leave `p`, with
    /// the cost of reaching each.
    fn anchors(&self, p: Point) -> [(VertexId, f64); 2] {
        match p {
            Point::Vertex(v) => [(v, 0.0), (v, 0.0)],
            Point::OnEdge { edge, offset } => {
                let e = &self.edges[edge.0];
                [(e.u, offset), (e.v, e.length - offset)]
            }
        }
    }

    fn vertex_point_distance(&self, v: VertexId, p: Point) -> f64 {
        self.anchors(p)
            .iter()
            .map(|&(a, c)| self.vertex_distance(v, a) + c)
            .fold(f64::INFINITY, f64::min)
    }

    /// Shortest-path distance between two points.
    pub fn distance(&self, a: Point, b: Point) -> Result<f64, MetricError> {
        let a = self.check_point(a)?;
        let b = self.check_point(b)?;
        Ok(self.distance_unchecked(a, b))
    }

    pub(crate) fn distance_unchecked(&self, a: Point, b: Point) -> f64 {
        let mut best = f64::INFINITY;
        if let (Point::OnEdge { edge: ea, offset: oa }, Point::OnEdge { edge: eb, offset: ob }) =
            (a, b)
        {
            if ea == eb {
                best = (oa - ob).abs();
            }
        }
        for (va, ca) in self.anchors(a) {
            for (vb, cb) in self.anchors(b) {
                best = best.min(ca + self.vertex_distance(va, vb) + cb);
            }
        }
        best
    }

    fn vertex_path_segments(&self, from: VertexId, to: VertexId) -> Vec<Segment> {
        let n = self.names.len();
        let mut edges = Vec::new();
        let mut cur = to;
        while cur != from {
            let eid = self.via[from.0 * n + cur.0].expect("connected metric");
            edges.push(eid);
            cur = self.edges[eid.0].other(cur);
        }
        edges.reverse();
        let mut at = from;
        edges
            .into_iter()
            .map(|eid| {
                let e = &self.edges[eid.0];
                let seg = Segment {
                    edge: eid,
                    from: e.endpoint_offset(at),
                    to: e.endpoint_offset(e.other(at)),
                };
                at = e.other(at);
                seg
            })
            .collect()
    }

    /// A unit-speed geodesic from `a` to `b`.
    pub fn shortest_path(&self, a: Point, b: Point) -> Result<PathPlan, MetricError> {
        let a = self.check_point(a)?;
        let b = self.check_point(b)?;
        let mut best = f64::INFINITY;
        let mut direct = false;
        if let (Point::OnEdge { edge: ea, offset: oa }, Point::OnEdge { edge: eb, offset: ob }) =
            (a, b)
        {
            if ea == eb {
                best = (oa - ob).abs();
                direct = true;
            }
        }
        let mut route = None;
        for (va, ca) in self.anchors(a) {
            for (vb, cb) in self.anchors(b) {
                let d = ca + self.vertex_distance(va, vb) + cb;
                if d < best - 1e-15 {
                    best = d;
                    direct = false;
                    route = Some((va, vb));
                }
            }
        }

        let mut segments = Vec::new();
        if direct {
            if let (Point::OnEdge { edge, offset: oa }, Point::OnEdge { offset: ob, .. }) = (a, b) {
                segments.push(Segment {
                    edge,
                    from: oa,
                    to: ob,
                });
            }
        } else if let Some((va, vb)) = route {
            if let Point::OnEdge { edge, offset } = a {
                let to = self.edges[edge.0].endpoint_offset(va);
                segments.push(Segment {
                    edge,
                    from: offset,
                    to,
                });
            }
            segments.extend(self.vertex_path_segments(va, vb));
            if let Point::OnEdge { edge, offset } = b {
                let from = self.edges[edge.0].endpoint_offset(vb);
                segments.push(Segment {
                    edge,
                    from,
                    to: offset,
                });
            }
        }
        segments.retain(|s| s.length() > 0.0);
        Ok(PathPlan::from_segments(a, segments))
    }

    /// Segment joining two points that lie on a common edge.
    fn adjacent_segment(&self, p: Point, q: Point) -> Option<Option<Segment>> {
        use Point::*;
        match (p, q) {
            (OnEdge { edge: ep, offset: op }, OnEdge { edge: eq, offset: oq }) if ep == eq => {
                Some(Some(Segment {
                    edge: ep,
                    from: op,
                    to: oq,
                }))
            }
            (OnEdge { edge, offset }, Vertex(v)) => {
                let e = &self.edges[edge.0];
                (v == e.u || v == e.v).then(|| {
                    Some(Segment {
                        edge,
                        from: offset,
                        to: e.endpoint_offset(v),
                    })
                })
            }
            (Vertex(v), OnEdge { edge, offset }) => {
                let e = &self.edges[edge.0];
                (v == e.u || v == e.v).then(|| {
                    Some(Segment {
                        edge,
                        from: e.endpoint_offset(v),
                        to: offset,
                    })
                })
            }
            (Vertex(x), Vertex(y)) if x == y => Some(None),
            (Vertex(x), Vertex(y)) => self.incident[x.0]
                .iter()
                .filter(|&&eid| self.edges[eid.0].other(x) == y)
                .min_by(|a, b| self.edges[a.0].length.total_cmp(&self.edges[b.0].length))
                .map(|&eid| {
                    let e = &self.edges[eid.0];
                    Some(Segment {
                        edge: eid,
                        from: e.endpoint_offset(x),
                        to: e.endpoint_offset(y),
                    })
                }),
            _ => None,
        }
    }

    /// Human-readable location: a vertex name or `edge#<index>@<offset>`.
    pub fn format_point(&self, p: Point) -> String {
        match p {
            Point::Vertex(v) => self.names[v.0].clone(),
            Point::OnEdge { edge, offset } => format!("edge#{}@{:.9}", edge.0, offset),
        }
    }

    /// Distance from the point at `x` on `edge` to `target`, split into the
    /// linear pieces whose minimum it is. Each piece is `(c0, c1)` for
    /// `c0 + c1 * x`; the same-edge piece `|x - o|` is reported separately.
    fn edge_distance_pieces(&self, edge: EdgeId, target: Point) -> ([(f64, f64); 2], Option<f64>) {
        let e = &self.edges[edge.0];
        let du = self.vertex_point_distance(e.u, target);
        let dv = self.vertex_point_distance(e.v, target);
        let same = match target {
            Point::OnEdge { edge: t, offset } if t == edge => Some(offset),
            _ => None,
        };
        ([(du, 1.0), (dv + e.length, -1.0)], same)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Straight traversal of part of one edge, offsets measured from `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub edge: EdgeId,
    pub from: f64,
    pub to: f64,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.to - self.from).abs()
    }

    fn direction(&self) -> f64 {
        if self.to >= self.from {
            1.0
        } else {
            -1.0
        }
    }
}

/// Unit-speed motion through a sequence of waypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPlan {
    start: Point,
    segments: Vec<Segment>,
    total_length: f64,
}

impl PathPlan {
    /// A plan that stays at `p`.
    pub fn stationary(p: Point) -> Self {
        Self {
            start: p,
            segments: Vec::new(),
            total_length: 0.0,
        }
    }

    fn from_segments(start: Point, segments: Vec<Segment>) -> Self {
        let total_length = segments.iter().map(Segment::length).sum();
        Self {
            start,
            segments,
            total_length,
        }
    }

    /// Joins consecutive waypoints, each pair of which must share an edge.
    pub fn through(m: &MetricSpace, waypoints: &[Point]) -> Result<Self, MetricError> {
        let first = *waypoints
            .first()
            .ok_or_else(|| MetricError::InvalidPoint("empty waypoint list".into()))?;
        let pts = waypoints
            .iter()
            .map(|&p| m.check_point(p))
            .collect::<Result<Vec<_>, _>>()?;
        let mut segments = Vec::new();
        for (i, w) in pts.windows(2).enumerate() {
            match m.adjacent_segment(w[0], w[1]) {
                Some(Some(s)) if s.length() > 0.0 => segments.push(s),
                Some(_) => {}
                None => return Err(MetricError::NotAdjacent(i, i + 1)),
            }
        }
        Ok(Self::from_segments(m.check_point(first)?, segments))
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn first(&self) -> Point {
        self.start
    }

    pub fn last(&self, m: &MetricSpace) -> Point {
        match self.segments.last() {
            Some(s) => m.normalize(s.edge, s.to),
            None => self.start,
        }
    }

    pub fn waypoints(&self, m: &MetricSpace) -> Vec<Point> {
        std::iter::once(self.start)
            .chain(self.segments.iter().map(|s| m.normalize(s.edge, s.to)))
            .collect()
    }

    /// The point at arc length `elapsed` along the plan.
    pub fn position_along(&self, m: &MetricSpace, elapsed: f64) -> Result<Point, MetricError> {
        if !(elapsed >= -EPS && elapsed <= self.total_length + EPS) {
            return Err(MetricError::ElapsedOutOfRange {
                elapsed,
                total: self.total_length,
            });
        }
        Ok(self.position_clamped(m, elapsed))
    }

    pub(crate) fn position_clamped(&self, m: &MetricSpace, elapsed: f64) -> Point {
        let mut left = elapsed.max(0.0);
        for s in &self.segments {
            let len = s.length();
            if left <= len {
                return m.normalize(s.edge, s.from + s.direction() * left);
            }
            left -= len;
        }
        self.last(m)
    }

    /// Earliest absolute time at which a mover that departs at `depart` comes
    /// within `tol` of `target`, or `None` if it never does during the plan.
    pub fn crossing_time(
        &self,
        m: &MetricSpace,
        depart: f64,
        target: Point,
        tol: f64,
    ) -> Option<f64> {
        self.crossing_time_from(m, depart, target, tol, depart)
    }

    /// As [`crossing_time`](Self::crossing_time), restricted to times `>= not_before`.
    pub fn crossing_time_from(
        &self,
        m: &MetricSpace,
        depart: f64,
        target: Point,
        tol: f64,
        not_before: f64,
    ) -> Option<f64> {
        let end = depart + self.total_length;
        if not_before > end + 1e-12 {
            return None;
        }
        if self.segments.is_empty() {
            return (m.distance_unchecked(self.start, target) <= tol).then_some(depart.max(not_before));
        }
        let mut best: Option<f64> = None;
        let mut acc = 0.0;
        for s in &self.segments {
            let len = s.length();
            let dir = s.direction();
            let seg_start = depart + acc;
            acc += len;
            if seg_start + len < not_before - 1e-12 {
                continue;
            }
            let mut consider = |lo: f64, hi: f64| {
                let lo = lo.max(0.0);
                let hi = hi.min(len);
                if lo > hi + 1e-15 {
                    return;
                }
                let (t_lo, t_hi) = (seg_start + lo, seg_start + hi);
                if t_hi < not_before - 1e-12 {
                    return;
                }
                let t = t_lo.max(not_before);
                best = Some(best.map_or(t, |b| b.min(t)));
            };
            let (pieces, same) = m.edge_distance_pieces(s.edge, target);
            // Along the segment x(s) = from + dir * s.
            for (c0, c1) in pieces {
                let a0 = c0 + c1 * s.from;
                let a1 = c1 * dir;
                if a1 == 0.0 {
                    if a0 <= tol {
                        consider(0.0, len);
                    }
                } else if a1 > 0.0 {
                    consider(0.0, (tol - a0) / a1);
                } else {
                    consider((tol - a0) / a1, len);
                }
            }
            if let Some(o) = same {
                let s1 = (o - tol - s.from) * dir;
                let s2 = (o + tol - s.from) * dir;
                consider(s1.min(s2), s1.max(s2));
            }
        }
        best
    }
}
