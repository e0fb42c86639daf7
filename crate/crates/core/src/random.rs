//! Seeded random instances on small connected graphs.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{Instance, RobotSpec};
use crate::metric::{Edge, EdgeId, MetricSpace, Point, VertexId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomConfig {
    pub max_vertices: usize,
    pub max_active: usize,
    pub min_frozen: usize,
    pub max_frozen: usize,
    /// Releases are drawn from `[0, max_release]`.
    pub max_release: f64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        Self {
            max_vertices: 6,
            max_active: 2,
            min_frozen: 0,
            max_frozen: 5,
            max_release: 3.0,
        }
    }
}

/// Values are rounded to a 1/8 grid so that ties and coincident points occur.
fn grid(x: f64) -> f64 {
    (x * 8.0).round() / 8.0
}

/// A random connected graph with 2 to `cfg.max_vertices` vertices and
/// edge lengths in `[0.25, 2]`.
pub fn random_metric(rng: &mut impl Rng, max_vertices: usize) -> MetricSpace {
    let n = rng.random_range(2..=max_vertices.max(2));
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push(Edge {
            u: VertexId(u),
            v: VertexId(v),
            length: grid(rng.random_range(0.25..2.0)),
        });
    }
    for _ in 0..rng.random_range(0..=n) {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            edges.push(Edge {
                u: VertexId(u),
                v: VertexId(v),
                length: grid(rng.random_range(0.25..2.0)),
            });
        }
    }
    let names = (0..n).map(|i| format!("v{i}")).collect();
    MetricSpace::new(names, edges).expect("connected by construction")
}

fn random_point(rng: &mut impl Rng, m: &MetricSpace) -> Point {
    if rng.random_bool(0.5) {
        Point::Vertex(VertexId(rng.random_range(0..m.num_vertices())))
    } else {
        let e = EdgeId(rng.random_range(0..m.num_edges()));
        let len = m.edge(e).length;
        let offset = grid(rng.random_range(0.0..len)).min(len);
        m.point_on_edge(e, offset).expect("offset within edge")
    }
}

pub fn random_instance(seed: u64, cfg: &RandomConfig) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let metric = Arc::new(random_metric(&mut rng, cfg.max_vertices));
    let active = rng.random_range(1..=cfg.max_active.max(1));
    let frozen = rng.random_range(cfg.min_frozen..=cfg.max_frozen.max(cfg.min_frozen));
    let mut robots = Vec::new();
    for i in 0..active {
        robots.push(RobotSpec::active(i as u32, random_point(&mut rng, &metric)));
    }
    for i in 0..frozen {
        let release = if rng.random_bool(0.2) {
            0.0
        } else {
            grid(rng.random_range(0.0..=cfg.max_release))
        };
        robots.push(RobotSpec::frozen(
            (active + i) as u32,
            random_point(&mut rng, &metric),
            release,
        ));
    }
    Instance::from_unsorted(metric, robots).expect("valid by construction")
}
