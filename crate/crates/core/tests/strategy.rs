use std::f64::consts::SQRT_2;

use ftag_core::random::{random_instance, RandomConfig};
use ftag_core::strategy::{
    strategy_by_name, OptBackend, StrategyConfigError, StrategyOptions, STRATEGY_NAMES,
};
use ftag_core::{
    opt_exact, simulate, GreedyDispatch, Instance, Patience, PatienceConfig, RobotId, SimOptions,
    SolverConfig,
};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn sigma_a() -> Instance {
    Instance::from_json(include_str!("../../../fixtures/m1_sigma_a.json")).unwrap()
}

#[test]
fn greedy_on_sigma_a() {
    let trace = simulate(&sigma_a(), &mut GreedyDispatch::new(), SimOptions::default()).unwrap();
    assert!((trace.makespan() - 2.0).abs() <= TOL);
}

#[test]
fn greedy_sends_nearest_robot() {
    // one starter at p0, both triangle robots released at 0
    let text = include_str!("../../../fixtures/m1_sigma_a_one_starter.json")
        .replace("\"release\": 1.0", "\"release\": 0.0");
    let one = Instance::from_json(&text).unwrap();
    let trace = simulate(&one, &mut GreedyDispatch::new(), SimOptions::default()).unwrap();
    assert_eq!(trace.wake_times()[&RobotId(2)], 1.0);
    assert_eq!(trace.wake_times()[&RobotId(3)], 2.0);
}

#[test]
fn patience_keeps_schedule() {
    let mut p = Patience::default();
    simulate(&sigma_a(), &mut p, SimOptions::default()).unwrap();
    let sched = p.schedule().unwrap();
    assert!((sched.opt - 1.0).abs() <= TOL);
    assert!((sched.offset - SQRT_2).abs() <= TOL);
    assert_eq!(sched.start_time(RobotId(2)), Some(1.0 + SQRT_2));
}

#[test]
fn wait_factor_below_one_is_rejected() {
    assert_eq!(
        PatienceConfig::new(0.5, OptBackend::GreedyUpperBound).unwrap_err(),
        StrategyConfigError::WaitFactorTooSmall(0.5)
    );
    assert!(PatienceConfig::new(f64::NAN, OptBackend::GreedyUpperBound).is_err());
    let opts = StrategyOptions {
        wait_factor: 0.9,
        ..StrategyOptions::default()
    };
    assert!(strategy_by_name("patience", &opts).is_err());
}

#[test]
fn names_and_backends() {
    for name in STRATEGY_NAMES {
        let s = strategy_by_name(name, &StrategyOptions::default()).unwrap();
        assert_eq!(s.name(), *name);
    }
    assert!(matches!(
        strategy_by_name("teleport", &StrategyOptions::default()),
        Err(StrategyConfigError::UnknownStrategy(_))
    ));
    let opts = StrategyOptions {
        opt_backend: "magic".into(),
        ..StrategyOptions::default()
    };
    assert!(matches!(
        strategy_by_name("patience", &opts),
        Err(StrategyConfigError::UnknownBackend(_))
    ));
    let opts = StrategyOptions {
        opt_backend: "greedy-upper-bound".into(),
        ..StrategyOptions::default()
    };
    let s = strategy_by_name("patience", &opts).unwrap();
    assert!(s.name().contains("no guarantee"));
}

#[test]
fn options_from_json() {
    let opts: StrategyOptions = serde_json::from_str(r#"{"wait_factor": 2.0}"#).unwrap();
    assert_eq!(opts.wait_factor, 2.0);
    assert_eq!(opts.opt_backend, "exact");
    assert!(serde_json::from_str::<StrategyOptions>(r#"{"speed": 2.0}"#).is_err());
}

#[test]
fn patience_with_larger_wait_factor() {
    let cfg = PatienceConfig::new(2.0, OptBackend::Exact(SolverConfig::default())).unwrap();
    let trace = simulate(&sigma_a(), &mut Patience::new(cfg), SimOptions::default()).unwrap();
    assert!((trace.makespan() - 3.0).abs() <= TOL);
}

#[test]
fn solver_cap_surfaces_as_strategy_error() {
    let rc = RandomConfig {
        min_frozen: 5,
        max_frozen: 5,
        ..RandomConfig::default()
    };
    let inst = random_instance(11, &rc);
    let cfg = PatienceConfig::new(SQRT_2, OptBackend::Exact(SolverConfig { frozen_cap: 1 })).unwrap();
    let err = simulate(&inst, &mut Patience::new(cfg), SimOptions::default()).unwrap_err();
    assert!(matches!(
        err,
        ftag_core::SimError::Strategy(ftag_core::StrategyError::OptBackend(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn patience_is_within_one_plus_root_two(seed in 0u64..100_000) {
        let inst = random_instance(seed, &RandomConfig::default());
        let opt = opt_exact(&inst, &SolverConfig::default()).unwrap().makespan;
        let trace = simulate(&inst, &mut Patience::default(), SimOptions::default()).unwrap();
        prop_assert!(trace.late_waits().is_empty(), "{:?}", trace.late_waits());
        prop_assert!(trace.makespan() <= (1.0 + SQRT_2) * opt + 1e-6);

        // every robot stays within T/(1+√2) of its home
        let m = inst.metric();
        let mut t = 0.0;
        while t <= trace.end_time() {
            for (id, p) in trace.positions_at(t).unwrap() {
                let home = inst.robot(id).unwrap().home;
                prop_assert!(m.distance(p, home).unwrap() <= t / (1.0 + SQRT_2) + 1e-6);
            }
            t += 0.01;
        }
    }

    #[test]
    fn greedy_wakes_everyone(seed in 0u64..100_000) {
        let inst = random_instance(seed, &RandomConfig::default());
        let trace = simulate(&inst, &mut GreedyDispatch::new(), SimOptions::default()).unwrap();
        prop_assert_eq!(trace.wake_times().len(), inst.frozen_count());
    }
}
