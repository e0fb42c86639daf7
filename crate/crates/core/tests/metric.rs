use std::f64::consts::SQRT_2;

use ftag_core::metric::{Edge, EdgeId, GraphSpec, MetricError, MetricSpace, PathPlan, Point, VertexId};
use ftag_core::random::random_metric;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn m1() -> MetricSpace {
    let spec: GraphSpec = serde_json::from_str(include_str!("../../../fixtures/m1_graph.json")).unwrap();
    MetricSpace::from_spec(&spec).unwrap()
}

fn v(m: &MetricSpace, name: &str) -> Point {
    Point::Vertex(m.vertex(name).unwrap())
}

#[test]
fn m1_has_fig1_size() {
    let m = m1();
    assert_eq!(m.num_vertices(), 8);
    assert_eq!(m.num_edges(), 10);
}

#[test]
fn single_vertex_space() {
    let m = MetricSpace::new(vec!["a".into()], vec![]).unwrap();
    let a = Point::Vertex(VertexId(0));
    assert_eq!(m.distance(a, a).unwrap(), 0.0);
}

#[test]
fn rejects_bad_graphs() {
    let two = vec!["a".to_string(), "b".to_string()];
    assert!(matches!(
        MetricSpace::new(two.clone(), vec![]),
        Err(MetricError::DisconnectedGraph { .. })
    ));
    let e = |len| Edge {
        u: VertexId(0),
        v: VertexId(1),
        length: len,
    };
    assert!(matches!(
        MetricSpace::new(two.clone(), vec![e(0.0)]),
        Err(MetricError::NonpositiveEdgeLength { index: 0, .. })
    ));
    assert!(matches!(
        MetricSpace::new(two.clone(), vec![e(-1.0)]),
        Err(MetricError::NonpositiveEdgeLength { .. })
    ));
    assert!(matches!(MetricSpace::new(vec![], vec![]), Err(MetricError::NoVertices)));
    let self_loop = Edge {
        u: VertexId(0),
        v: VertexId(0),
        length: 1.0,
    };
    assert!(matches!(
        MetricSpace::new(two.clone(), vec![e(1.0), self_loop]),
        Err(MetricError::SelfLoop { index: 1 })
    ));
    let spec: GraphSpec = serde_json::from_str(
        r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"zz","length":1.0}]}"#,
    )
    .unwrap();
    assert!(matches!(MetricSpace::from_spec(&spec), Err(MetricError::UnknownVertex(_))));
}

#[test]
fn m1_distances() {
    let m = m1();
    let d = |a, b| m.distance(v(&m, a), v(&m, b)).unwrap();
    assert!((d("p0", "p7") - (1.0 + SQRT_2)).abs() <= TOL);
    assert!((d("p1", "p3") - 2.0).abs() <= TOL);
    assert_eq!(d("p5", "p5"), 0.0);
    assert!((d("p3", "p4") - 1.0).abs() <= TOL);
    assert!((d("p7", "p4") - (2.0 + SQRT_2)).abs() <= TOL);
}

#[test]
fn interior_point_distances() {
    let m = m1();
    // edge 2 is p0-p3, edge 3 is p0-p4, edge 8 is p3-p4
    let a = m.point_on_edge(EdgeId(2), 0.25).unwrap();
    let b = m.point_on_edge(EdgeId(3), 0.5).unwrap();
    assert!((m.distance(a, b).unwrap() - 0.75).abs() <= TOL);
    let c = m.point_on_edge(EdgeId(8), 0.5).unwrap();
    assert!((m.distance(a, c).unwrap() - 1.25).abs() <= TOL);
    let d = m.point_on_edge(EdgeId(2), 0.75).unwrap();
    assert!((m.distance(a, d).unwrap() - 0.5).abs() <= TOL);
}

#[test]
fn endpoint_offsets_normalize_to_vertices() {
    let m = m1();
    assert_eq!(m.point_on_edge(EdgeId(2), 0.0).unwrap(), v(&m, "p0"));
    assert_eq!(m.point_on_edge(EdgeId(2), 1.0).unwrap(), v(&m, "p3"));
    assert_eq!(m.point_on_edge(EdgeId(2), 1.0 - 1e-12).unwrap(), v(&m, "p3"));
    assert!(m.point_on_edge(EdgeId(2), 1.5).is_err());
    assert!(m.point_on_edge(EdgeId(99), 0.5).is_err());
    assert!(m.distance(Point::Vertex(VertexId(42)), v(&m, "p0")).is_err());
}

#[test]
fn shortest_paths_on_m1() {
    let m = m1();
    let p = m.shortest_path(v(&m, "p3"), v(&m, "p4")).unwrap();
    assert_eq!(p.total_length(), 1.0);
    assert_eq!(p.segments().len(), 1);
    assert_eq!(p.segments()[0].edge, EdgeId(8));

    let p = m.shortest_path(v(&m, "p2"), v(&m, "p2")).unwrap();
    assert_eq!(p.total_length(), 0.0);
    assert_eq!(p.waypoints(&m), vec![v(&m, "p2")]);

    let p = m.shortest_path(v(&m, "p1"), v(&m, "p3")).unwrap();
    assert!((p.total_length() - 2.0).abs() <= TOL);
    assert_eq!(p.waypoints(&m), vec![v(&m, "p1"), v(&m, "p0"), v(&m, "p3")]);
}

#[test]
fn positions_along_plans() {
    let m = m1();
    let spoke = m.shortest_path(v(&m, "p0"), v(&m, "p7")).unwrap();
    assert_eq!(
        spoke.position_along(&m, 1.0).unwrap(),
        Point::OnEdge {
            edge: EdgeId(6),
            offset: 1.0
        }
    );
    assert_eq!(spoke.position_along(&m, 0.0).unwrap(), v(&m, "p0"));
    assert_eq!(spoke.position_along(&m, 1.0 + SQRT_2).unwrap(), v(&m, "p7"));
    assert!(matches!(
        spoke.position_along(&m, 3.0),
        Err(MetricError::ElapsedOutOfRange { .. })
    ));

    let p = PathPlan::through(&m, &[v(&m, "p1"), v(&m, "p0"), v(&m, "p3")]).unwrap();
    assert_eq!(
        p.position_along(&m, 1.5).unwrap(),
        Point::OnEdge {
            edge: EdgeId(2),
            offset: 0.5
        }
    );
    assert!(PathPlan::through(&m, &[v(&m, "p1"), v(&m, "p3")]).is_err());
}

#[test]
fn crossing_times() {
    let m = m1();
    let p = m.shortest_path(v(&m, "p0"), v(&m, "p3")).unwrap();
    assert_eq!(p.crossing_time(&m, 0.0, v(&m, "p3"), 0.0), Some(1.0));
    assert_eq!(p.crossing_time(&m, 0.0, v(&m, "p7"), 1e-9), None);

    let p = PathPlan::through(&m, &[v(&m, "p3"), v(&m, "p0"), v(&m, "p4")]).unwrap();
    let mid = m.point_on_edge(EdgeId(3), 0.5).unwrap();
    let t = p.crossing_time(&m, 2.0, mid, 0.0).unwrap();
    assert!((t - 3.5).abs() <= TOL);
    let t = p.crossing_time(&m, 2.0, mid, 0.1).unwrap();
    assert!((t - 3.4).abs() <= TOL);
}

#[test]
fn multi_edges_use_the_shorter_copy() {
    let m = MetricSpace::new(
        vec!["a".into(), "b".into()],
        vec![
            Edge {
                u: VertexId(0),
                v: VertexId(1),
                length: 3.0,
            },
            Edge {
                u: VertexId(1),
                v: VertexId(0),
                length: 1.0,
            },
        ],
    )
    .unwrap();
    let a = Point::Vertex(VertexId(0));
    let b = Point::Vertex(VertexId(1));
    assert_eq!(m.distance(a, b).unwrap(), 1.0);
    // the middle of the long edge is reached around the short one
    let mid = m.point_on_edge(EdgeId(0), 2.5).unwrap();
    assert!((m.distance(a, mid).unwrap() - 1.5).abs() <= TOL);
    let p = m.shortest_path(a, mid).unwrap();
    assert!((p.total_length() - 1.5).abs() <= TOL);
}

#[test]
fn non_geodesic_edge_interior() {
    // a-b has length 5 but a-c-b has length 2; two points on a-b near the
    // ends are closer around the detour.
    let m = MetricSpace::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![
            Edge {
                u: VertexId(0),
                v: VertexId(1),
                length: 5.0,
            },
            Edge {
                u: VertexId(0),
                v: VertexId(2),
                length: 1.0,
            },
            Edge {
                u: VertexId(2),
                v: VertexId(1),
                length: 1.0,
            },
        ],
    )
    .unwrap();
    let x = m.point_on_edge(EdgeId(0), 0.5).unwrap();
    let y = m.point_on_edge(EdgeId(0), 4.5).unwrap();
    assert!((m.distance(x, y).unwrap() - 3.0).abs() <= TOL);
}

#[test]
fn graph_json_round_trip() {
    let m = m1();
    let again = MetricSpace::from_spec(&m.to_spec()).unwrap();
    assert_eq!(m, again);
}

// ---- oracle: enumerate simple vertex paths ----

fn simple_paths(m: &MetricSpace, from: VertexId, to: VertexId) -> f64 {
    fn go(m: &MetricSpace, at: VertexId, to: VertexId, seen: &mut Vec<bool>, len: f64, best: &mut f64) {
        if at == to {
            *best = best.min(len);
            return;
        }
        for &e in m.incident_edges(at) {
            let edge = m.edge(e);
            let next = if edge.u == at { edge.v } else { edge.u };
            if !seen[next.0] {
                seen[next.0] = true;
                go(m, next, to, seen, len + edge.length, best);
                seen[next.0] = false;
            }
        }
    }
    let mut seen = vec![false; m.num_vertices()];
    seen[from.0] = true;
    let mut best = f64::INFINITY;
    go(m, from, to, &mut seen, 0.0, &mut best);
    best
}

fn oracle_distance(m: &MetricSpace, a: Point, b: Point) -> f64 {
    let ends = |p: Point| match p {
        Point::Vertex(v) => vec![(v, 0.0)],
        Point::OnEdge { edge, offset } => {
            let e = m.edge(edge);
            vec![(e.u, offset), (e.v, e.length - offset)]
        }
    };
    let mut best = f64::INFINITY;
    if let (Point::OnEdge { edge: ea, offset: oa }, Point::OnEdge { edge: eb, offset: ob }) = (a, b) {
        if ea == eb {
            best = (oa - ob).abs();
        }
    }
    for (va, ca) in ends(a) {
        for (vb, cb) in ends(b) {
            best = best.min(ca + simple_paths(m, va, vb) + cb);
        }
    }
    best
}

fn sample_point(rng: &mut impl Rng, m: &MetricSpace) -> Point {
    if rng.random_bool(0.4) {
        Point::Vertex(VertexId(rng.random_range(0..m.num_vertices())))
    } else {
        let e = EdgeId(rng.random_range(0..m.num_edges()));
        let len = m.edge(e).length;
        m.point_on_edge(e, rng.random_range(0.0..=len)).unwrap()
    }
}

proptest! {
    #[test]
    fn metric_axioms(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, 8);
        for _ in 0..10 {
            let a = sample_point(&mut rng, &m);
            let b = sample_point(&mut rng, &m);
            let c = sample_point(&mut rng, &m);
            let ab = m.distance(a, b).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(m.distance(a, a).unwrap(), 0.0);
            prop_assert!((ab - m.distance(b, a).unwrap()).abs() <= TOL);
            let ac = m.distance(a, c).unwrap();
            let cb = m.distance(c, b).unwrap();
            prop_assert!(ab <= ac + cb + TOL);
        }
    }

    #[test]
    fn distance_matches_path_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, 5);
        for _ in 0..10 {
            let a = sample_point(&mut rng, &m);
            let b = sample_point(&mut rng, &m);
            let want = oracle_distance(&m, a, b);
            prop_assert!((m.distance(a, b).unwrap() - want).abs() <= TOL, "{:?} {:?}", a, b);
        }
    }

    #[test]
    fn shortest_path_realizes_distance(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, 8);
        for _ in 0..10 {
            let a = sample_point(&mut rng, &m);
            let b = sample_point(&mut rng, &m);
            let p = m.shortest_path(a, b).unwrap();
            prop_assert!((p.total_length() - m.distance(a, b).unwrap()).abs() <= TOL);
            prop_assert_eq!(p.first(), m.check_point(a).unwrap());
            prop_assert!(m.distance(p.last(&m), b).unwrap() <= TOL);
            let wps = p.waypoints(&m);
            let sum: f64 = wps.windows(2).map(|w| m.distance(w[0], w[1]).unwrap()).sum();
            prop_assert!((sum - p.total_length()).abs() <= TOL);
        }
    }

    #[test]
    fn position_along_is_lipschitz(seed in any::<u64>(), s in 0.0f64..1.0, r in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, 8);
        let a = sample_point(&mut rng, &m);
        let b = sample_point(&mut rng, &m);
        let p = m.shortest_path(a, b).unwrap();
        let (x, y) = (s * p.total_length(), r * p.total_length());
        let px = p.position_along(&m, x).unwrap();
        let py = p.position_along(&m, y).unwrap();
        prop_assert!(m.distance(px, py).unwrap() <= (x - y).abs() + TOL);
    }

    #[test]
    fn crossing_time_is_first_contact(seed in any::<u64>(), tol in 0.0f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_metric(&mut rng, 6);
        let a = sample_point(&mut rng, &m);
        let b = sample_point(&mut rng, &m);
        let target = sample_point(&mut rng, &m);
        let p = m.shortest_path(a, b).unwrap();
        let len = p.total_length();
        let within = |s: f64| m.distance(p.position_along(&m, s).unwrap(), target).unwrap() <= tol + TOL;
        let steps = 400;
        let first_sample = (0..=steps).map(|i| len * i as f64 / steps as f64).find(|&s| within(s));
        match p.crossing_time(&m, 1.0, target, tol) {
            Some(t) => {
                prop_assert!(within(t - 1.0));
                if let Some(s) = first_sample {
                    prop_assert!(t - 1.0 <= s + TOL);
                }
            }
            None => prop_assert!(first_sample.is_none()),
        }
    }
}
