use std::sync::Arc;

use ftag_core::instance::{InstanceError, PointFile};
use ftag_core::metric::{EdgeId, Point, VertexId};
use ftag_core::random::{random_instance, RandomConfig};
use ftag_core::{Instance, RobotId, RobotSpec};
use proptest::prelude::*;

const SIGMA_A: &str = include_str!("../../../fixtures/m1_sigma_a.json");

fn sigma_a() -> Instance {
    Instance::from_json(SIGMA_A).unwrap()
}

#[test]
fn sigma_a_fixture_loads() {
    let inst = sigma_a();
    assert_eq!(inst.robots().len(), 4);
    assert_eq!(inst.metric().num_vertices(), 8);
    assert_eq!(inst.starters().count(), 2);
    assert_eq!(inst.frozen_count(), 2);
    assert_eq!(inst.last_release(), 1.0);
    let homes: Vec<String> = inst.frozen().map(|r| inst.metric().format_point(r.home)).collect();
    assert_eq!(homes, vec!["p3", "p4"]);
}

#[test]
fn validation_errors() {
    let inst = sigma_a();
    let m = Arc::clone(inst.metric_arc());
    let p0 = Point::Vertex(VertexId(0));

    let no_active = vec![RobotSpec::frozen(0, p0, 1.0)];
    assert_eq!(Instance::new(Arc::clone(&m), no_active).unwrap_err(), InstanceError::NoActiveRobot);

    let unsorted = vec![
        RobotSpec::active(0, p0),
        RobotSpec::frozen(1, p0, 2.0),
        RobotSpec::frozen(2, p0, 1.0),
    ];
    assert_eq!(
        Instance::new(Arc::clone(&m), unsorted.clone()).unwrap_err(),
        InstanceError::UnsortedReleases(2)
    );
    assert!(Instance::from_unsorted(Arc::clone(&m), unsorted).is_ok());

    let mut early = RobotSpec::active(0, p0);
    early.release = 0.5;
    assert_eq!(
        Instance::new(Arc::clone(&m), vec![early]).unwrap_err(),
        InstanceError::ActiveWithPositiveRelease(RobotId(0))
    );

    let off = Point::OnEdge {
        edge: EdgeId(0),
        offset: 7.0,
    };
    assert!(matches!(
        Instance::new(Arc::clone(&m), vec![RobotSpec::active(0, off)]),
        Err(InstanceError::InvalidHome { .. })
    ));

    let dup = vec![RobotSpec::active(0, p0), RobotSpec::frozen(0, p0, 1.0)];
    assert_eq!(Instance::new(Arc::clone(&m), dup).unwrap_err(), InstanceError::DuplicateId(RobotId(0)));

    let neg = vec![RobotSpec::active(0, p0), RobotSpec::frozen(1, p0, -1.0)];
    assert_eq!(Instance::new(m, neg).unwrap_err(), InstanceError::BadRelease(RobotId(1)));
}

#[test]
fn truncation_examples() {
    let inst = sigma_a();
    assert_eq!(inst.truncate(0.5).robots().len(), 2);
    assert_eq!(inst.truncate(1.0).robots(), inst.robots());
    assert_eq!(inst.truncate(f64::INFINITY).robots(), inst.robots());
}

#[test]
fn unknown_field_is_a_schema_error() {
    let bad = SIGMA_A.replacen("\"release\"", "\"colour\": 1, \"release\"", 1);
    match Instance::from_json(&bad) {
        Err(InstanceError::Schema { path, .. }) => assert_eq!(path, "robots[0].colour"),
        other => panic!("expected schema error, got {other:?}"),
    }
    let wrong_type = SIGMA_A.replacen("\"release\": 0.0", "\"release\": \"soon\"", 1);
    match Instance::from_json(&wrong_type) {
        Err(InstanceError::Schema { path, .. }) => assert_eq!(path, "robots[0].release"),
        other => panic!("expected schema error, got {other:?}"),
    }
}

#[test]
fn malformed_json_is_a_parse_error() {
    assert!(matches!(Instance::from_json("{\"metric\": "), Err(InstanceError::Parse(_))));
    assert!(matches!(Instance::from_json("not json"), Err(InstanceError::Parse(_))));
}

#[test]
fn edge_points_in_json() {
    let text = SIGMA_A.replacen(
        "{\n        \"vertex\": \"p3\"\n      }",
        "{\"edge\": {\"index\": 2, \"offset\": 0.5}}",
        1,
    );
    assert_ne!(text, SIGMA_A);
    let inst = Instance::from_json(&text).unwrap();
    let r = inst.robot(RobotId(2)).unwrap();
    assert_eq!(
        r.home,
        Point::OnEdge {
            edge: EdgeId(2),
            offset: 0.5
        }
    );
    assert_eq!(
        PointFile::from_point(inst.metric(), r.home),
        PointFile::Edge(ftag_core::instance::EdgePosition {
            index: 2,
            offset: 0.5
        })
    );
}

#[test]
fn save_load_round_trip_on_fixture() {
    let inst = sigma_a();
    let again = Instance::from_json(&inst.to_json()).unwrap();
    assert_eq!(again.robots(), inst.robots());
    assert_eq!(again.to_json(), inst.to_json());
}

proptest! {
    #[test]
    fn truncate_composes(seed in any::<u64>(), a in 0.0f64..4.0, b in 0.0f64..4.0) {
        let inst = random_instance(seed, &RandomConfig::default());
        let twice = inst.truncate(a).truncate(b);
        let once = inst.truncate(a.min(b));
        prop_assert_eq!(twice.robots(), once.robots());
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let inst = random_instance(seed, &RandomConfig::default());
        let again = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(again.robots().len(), inst.robots().len());
        for (x, y) in again.robots().iter().zip(inst.robots()) {
            prop_assert_eq!(x.id, y.id);
            prop_assert_eq!(x.initially_active, y.initially_active);
            prop_assert!((x.release - y.release).abs() <= 1e-12);
            prop_assert!(inst.metric().distance(x.home, y.home).unwrap() <= 1e-12);
        }
        prop_assert_eq!(again.metric(), inst.metric());
    }

    #[test]
    fn random_instances_are_valid(seed in any::<u64>()) {
        let cfg = RandomConfig::default();
        let inst = random_instance(seed, &cfg);
        prop_assert!(inst.validate().is_ok());
        prop_assert!(inst.metric().num_vertices() <= cfg.max_vertices);
        prop_assert!(inst.frozen_count() <= cfg.max_frozen);
        prop_assert!(inst.last_release() <= cfg.max_release);
    }
}

#[test]
fn random_instances_are_reproducible() {
    let cfg = RandomConfig::default();
    assert_eq!(random_instance(7, &cfg).to_json(), random_instance(7, &cfg).to_json());
}
