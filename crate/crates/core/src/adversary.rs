//! Lower-bound constructions: the trees `T_k`, the metrics `M_k` built from
//! them, and the interactive adversary that plays a request sequence against
//! a running strategy.
//!
//! `T_0` is a point and `T_1` a unit edge. `T_{k+1}` has a root with `N_k`
//! children at distance 1/2, each child being the root of a copy of `T_k`
//! with all lengths halved, so every root-to-leaf path has length 1. `M_k`
//! joins `N_k + 1` copies of `T_k` and `N_k - 1` spokes of length `1 + √2`
//! to an origin `p0`, with every tree vertex linked to `p0` by a unit edge.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::instance::{Instance, InstanceError, RobotSpec};
use crate::metric::{Edge, EdgeId, MetricSpace, Point, VertexId, EPS};
use crate::sim::{RobotStatus, SimError, SimOptions, Simulation, Strategy, Trace};

/// Largest supported level; `T_4` has 677 nodes and `M_4` is out of reach.
pub const MAX_K: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdversaryError {
    #[error("level {k} is not supported (expected {min}..={max})")]
    KOutOfRange { k: usize, min: usize, max: usize },
    #[error("every tree copy is occupied at time 1")]
    NoEmptyCopy,
    #[error("layer {layer}: {robots} robots above it but {nodes} nodes in it")]
    CountMismatch {
        layer: usize,
        robots: usize,
        nodes: usize,
    },
    #[error("dt must be positive, got {0}")]
    BadStep(f64),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// The node counts `N_0, N_1, ...`: 1, 2 and then `N_{k+1} = N_k² + 1`.
/// Returns `None` once the value overflows.
pub fn n_sequence(k: usize) -> Option<u64> {
    let mut n: u64 = 1;
    for i in 0..k {
        n = if i == 0 { 2 } else { n.checked_mul(n)?.checked_add(1)? };
    }
    Some(n)
}

fn check_k(k: usize, min: usize) -> Result<(), AdversaryError> {
    if k < min || k > MAX_K {
        return Err(AdversaryError::KOutOfRange {
            k,
            min,
            max: MAX_K,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub parent: Option<usize>,
    pub layer: usize,
    /// Length of the edge to the parent (0 for the root).
    pub edge_length: f64,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeSpec {
    pub k: usize,
    /// Node 0 is the root; parents precede their children.
    pub nodes: Vec<TreeNode>,
}

impl TreeSpec {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn down_degree(&self, node: usize) -> usize {
        self.nodes[node].children.len()
    }

    pub fn layer_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k + 1];
        for n in &self.nodes {
            counts[n.layer] += 1;
        }
        counts
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty())
    }

    /// Distance from the root along tree edges.
    pub fn depth(&self, mut node: usize) -> f64 {
        let mut d = 0.0;
        while let Some(p) = self.nodes[node].parent {
            d += self.nodes[node].edge_length;
            node = p;
        }
        d
    }

    /// Frozen robots placed at `node` by [`sigma_requests`].
    pub fn requests_at(&self, node: usize) -> usize {
        let d = self.down_degree(node);
        if d == 0 {
            1
        } else if node == 0 {
            d
        } else {
            (d - 1).max(1)
        }
    }

    fn grow(&mut self, parent: Option<usize>, edge_length: f64, k: usize, scale: f64) {
        let id = self.nodes.len();
        let layer = parent.map_or(0, |p| self.nodes[p].layer + 1);
        self.nodes.push(TreeNode {
            parent,
            layer,
            edge_length,
            children: Vec::new(),
        });
        if let Some(p) = parent {
            self.nodes[p].children.push(id);
        }
        match k {
            0 => {}
            1 => self.grow(Some(id), scale, 0, scale),
            _ => {
                let fanout = n_sequence(k - 1).expect("small level") as usize;
                for _ in 0..fanout {
                    self.grow(Some(id), scale / 2.0, k - 1, scale / 2.0);
                }
            }
        }
    }
}

pub fn build_tree(k: usize) -> Result<TreeSpec, AdversaryError> {
    check_k(k, 0)?;
    let mut tree = TreeSpec {
        k,
        nodes: Vec::new(),
    };
    tree.grow(None, 0.0, k, 1.0);
    Ok(tree)
}

/// One copy of `T_k` inside `M_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeCopy {
    /// Vertex of each tree node, indexed like [`TreeSpec::nodes`].
    pub vertices: Vec<VertexId>,
    pub tree_edges: Vec<EdgeId>,
    /// Unit edges from `p0` to each vertex of the copy.
    pub links: Vec<EdgeId>,
}

impl TreeCopy {
    pub fn root(&self) -> VertexId {
        self.vertices[0]
    }

    /// True if `p` is a vertex of the copy or lies inside one of its edges.
    pub fn touches(&self, p: Point) -> bool {
        match p {
            Point::Vertex(v) => self.vertices.contains(&v),
            Point::OnEdge { edge, .. } => {
                self.tree_edges.contains(&edge) || self.links.contains(&edge)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct LowerBoundMetric {
    pub k: usize,
    pub metric: Arc<MetricSpace>,
    pub tree: TreeSpec,
    pub origin: VertexId,
    pub spokes: Vec<VertexId>,
    /// Spoke edges, oriented away from `p0`.
    pub spoke_edges: Vec<EdgeId>,
    pub copies: Vec<TreeCopy>,
}

impl LowerBoundMetric {
    /// `N_k`, the number of starting robots the construction is built for.
    pub fn n(&self) -> usize {
        self.tree.node_count()
    }

    pub fn is_on_spoke(&self, p: Point) -> bool {
        match p {
            Point::Vertex(v) => self.spokes.contains(&v),
            Point::OnEdge { edge, .. } => self.spoke_edges.contains(&edge),
        }
    }
}

/// Builds `M_k`. Vertices are named `p0`, then the copies node by node, then
/// the spoke ends; for `k = 1` this reproduces the naming `p0..p7` with the
/// copies on `p1 p2`, `p3 p4`, `p5 p6` and the spoke at `p7`.
pub fn build_metric_k(k: usize) -> Result<LowerBoundMetric, AdversaryError> {
    check_k(k, 1)?;
    let tree = build_tree(k)?;
    let n = tree.node_count();
    let size = tree.node_count();
    let origin = VertexId(0);
    let mut names = vec!["p0".to_string()];
    let mut copies = Vec::new();
    for c in 0..=n {
        let vertices = (0..size).map(|i| VertexId(1 + c * size + i)).collect();
        copies.push(TreeCopy {
            vertices,
            tree_edges: Vec::new(),
            links: Vec::new(),
        });
    }
    let spokes: Vec<VertexId> = (0..n - 1)
        .map(|s| VertexId(1 + (n + 1) * size + s))
        .collect();
    let total = 1 + (n + 1) * size + spokes.len();
    names.extend((1..total).map(|i| format!("p{i}")));

    let mut edges = Vec::new();
    for copy in &mut copies {
        for &v in &copy.vertices {
            copy.links.push(EdgeId(edges.len()));
            edges.push(Edge {
                u: origin,
                v,
                length: 1.0,
            });
        }
    }
    let mut spoke_edges = Vec::new();
    for &s in &spokes {
        spoke_edges.push(EdgeId(edges.len()));
        edges.push(Edge {
            u: origin,
            v: s,
            length: 1.0 + SQRT_2,
        });
    }
    for copy in &mut copies {
        for (i, node) in tree.nodes.iter().enumerate() {
            if let Some(p) = node.parent {
                copy.tree_edges.push(EdgeId(edges.len()));
                edges.push(Edge {
                    u: copy.vertices[p],
                    v: copy.vertices[i],
                    length: node.edge_length,
                });
            }
        }
    }
    let metric = Arc::new(MetricSpace::new(names, edges).expect("construction is a valid graph"));
    Ok(LowerBoundMetric {
        k,
        metric,
        tree,
        origin,
        spokes,
        spoke_edges,
        copies,
    })
}

/// Frozen robots for one tree copy, all released at `release`: one per leaf,
/// `max(d - 1, 1)` at an inner node of down-degree `d` and `d` at the root.
/// Ids are assigned consecutively from `first_id` in node order.
pub fn sigma_requests(
    copy: &TreeCopy,
    tree: &TreeSpec,
    release: f64,
    first_id: u32,
) -> Vec<RobotSpec> {
    let mut out = Vec::new();
    for (node, &v) in copy.vertices.iter().enumerate() {
        for _ in 0..tree.requests_at(node) {
            let id = first_id + out.len() as u32;
            out.push(RobotSpec::frozen(id, Point::Vertex(v), release));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LayerCount {
    pub layer: usize,
    /// Robots placed in layers above `layer`.
    pub robots_above: usize,
    pub nodes: usize,
    /// False when a down-degree-1 node above the layer receives a robot the
    /// counting argument does not expect; then `robots_above` may exceed `nodes`.
    pub strict: bool,
}

/// Compares, for every layer `i >= 1`, the robots requested in layers
/// `0..i` with the node count of layer `i`.
pub fn robot_count_check(tree: &TreeSpec) -> Result<Vec<LayerCount>, AdversaryError> {
    let counts = tree.layer_counts();
    let mut rows = Vec::new();
    for layer in 1..=tree.k {
        let above = (0..tree.node_count()).filter(|&i| tree.nodes[i].layer < layer);
        let robots_above = above.clone().map(|i| tree.requests_at(i)).sum();
        let strict = !above
            .clone()
            .any(|i| tree.nodes[i].layer >= 1 && tree.down_degree(i) == 1);
        let row = LayerCount {
            layer,
            robots_above,
            nodes: counts[layer],
            strict,
        };
        if (strict && robots_above != row.nodes) || robots_above < row.nodes {
            return Err(AdversaryError::CountMismatch {
                layer,
                robots: robots_above,
                nodes: row.nodes,
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// `R_k = 1 + √2 - (√2 - 1)^(k+1)`.
pub fn r_bound(k: u32) -> f64 {
    1.0 + SQRT_2 - (SQRT_2 - 1.0).powi(k as i32 + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversaryOptions {
    /// Sampling step of the trigger check.
    pub dt: f64,
    pub sim: SimOptions,
}

impl Default for AdversaryOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            sim: SimOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "lowercase")]
pub enum AdversaryCase {
    /// No spoke requests; the optimum is 1.
    Case1,
    /// Spoke requests released at `t_star`, which is also the optimum.
    Case2 { t_star: f64 },
}

impl AdversaryCase {
    pub fn tag(&self) -> &'static str {
        match self {
            AdversaryCase::Case1 => "case1",
            AdversaryCase::Case2 { .. } => "case2",
        }
    }

    pub fn t_star(&self) -> Option<f64> {
        match self {
            AdversaryCase::Case1 => None,
            AdversaryCase::Case2 { t_star } => Some(*t_star),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdversaryReport {
    pub k: usize,
    pub strategy: String,
    pub case: AdversaryCase,
    /// Index of the tree copy that received the requests at time 1.
    pub copy: usize,
    /// Every robot of the run, spoke requests included.
    pub instance: Instance,
    pub trace: Trace,
    /// Optimum of `instance`, certified by an explicit schedule and the
    /// last release time.
    pub certified_opt: f64,
    pub makespan: f64,
    pub achieved_ratio: f64,
    pub r_bound: f64,
}

impl AdversaryReport {
    pub fn to_json(&self) -> String {
        let instance: serde_json::Value =
            serde_json::from_str(&self.instance.to_json()).expect("instance JSON");
        let value = serde_json::json!({
            "k": self.k,
            "strategy": self.strategy,
            "case": self.case.tag(),
            "t_star": self.case.t_star(),
            "copy": self.copy,
            "certified_opt": self.certified_opt,
            "makespan": self.makespan,
            "achieved_ratio": self.achieved_ratio,
            "r_bound": self.r_bound,
            "instance": instance,
        });
        serde_json::to_string_pretty(&value).expect("report serializes")
    }
}

/// Plays the adversary against `strategy` on `M_k`.
///
/// `N_k` robots start at `p0`. At time 1 the first tree copy with no robot
/// on it receives [`sigma_requests`]. From time 2 to `1 + √2` the number of
/// active robots within `t(√2 - 1)` of `p0` or on a spoke is sampled every
/// `dt` and at every event; the first time it drops to `N_k - 2` or below,
/// one robot is released on each spoke at distance `t` from `p0`.
pub fn run_adversary(
    k: usize,
    strategy: &mut dyn Strategy,
    opts: &AdversaryOptions,
) -> Result<AdversaryReport, AdversaryError> {
    check_k(k, 1)?;
    if !(opts.dt > 0.0) {
        return Err(AdversaryError::BadStep(opts.dt));
    }
    let lb = build_metric_k(k)?;
    let n = lb.n();
    let m = Arc::clone(&lb.metric);
    let name = strategy.name();

    let mut robots: Vec<RobotSpec> = (0..n as u32)
        .map(|i| RobotSpec::active(i, Point::Vertex(lb.origin)))
        .collect();
    let start = Instance::new(Arc::clone(&m), robots.clone())?;
    let mut sim = Simulation::new(&start, strategy, opts.sim)?;

    sim.run_until(1.0)?;
    let positions = sim.positions();
    let copy = lb
        .copies
        .iter()
        .position(|c| !positions.values().any(|&p| c.touches(p)))
        .ok_or(AdversaryError::NoEmptyCopy)?;
    let requests = sigma_requests(&lb.copies[copy], &lb.tree, 1.0, n as u32);
    for r in &requests {
        sim.inject(r.clone())?;
    }
    robots.extend(requests);

    let end = 1.0 + SQRT_2;
    let mut case = AdversaryCase::Case1;
    let mut step = 0u64;
    loop {
        let grid = (2.0 + step as f64 * opts.dt).min(end);
        let t = match sim.next_event_time() {
            Some(te) if te >= 2.0 && te < grid => te,
            _ => grid,
        };
        sim.run_until(t)?;
        let radius = t * (SQRT_2 - 1.0) + EPS;
        let near = sim
            .positions()
            .into_iter()
            .filter(|(id, p)| {
                sim.status(*id) == Some(RobotStatus::Active)
                    && (m.distance(Point::Vertex(lb.origin), *p).expect("valid point") <= radius
                        || lb.is_on_spoke(*p))
            })
            .count();
        if near + 2 <= n {
            case = AdversaryCase::Case2 { t_star: t };
            break;
        }
        if t >= end {
            break;
        }
        if t >= grid {
            step += 1;
        }
    }

    let certified_opt = match case {
        AdversaryCase::Case1 => 1.0,
        AdversaryCase::Case2 { t_star } => {
            let first = robots.len() as u32;
            for (s, &edge) in lb.spoke_edges.iter().enumerate() {
                let home = m.point_on_edge(edge, t_star).expect("t* within the spoke");
                let spec = RobotSpec::frozen(first + s as u32, home, t_star);
                sim.inject(spec.clone())?;
                robots.push(spec);
            }
            t_star
        }
    };

    let trace = sim.finish()?;
    let instance = Instance::from_unsorted(m, robots)?;
    let makespan = trace.makespan();
    Ok(AdversaryReport {
        k,
        strategy: name,
        case,
        copy,
        instance,
        trace,
        certified_opt,
        makespan,
        achieved_ratio: makespan / certified_opt,
        r_bound: r_bound(k as u32),
    })
}
