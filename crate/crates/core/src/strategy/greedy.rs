use std::collections::BTreeMap;

use crate::instance::RobotId;
use crate::sim::{Leg, Plan, SimView, Strategy, StrategyError};

/// Baseline: every idle active robot heads straight for the nearest released
/// frozen robot nobody else is heading for. Pairs are formed closest first,
/// ties going to the lower target id and then the lower robot id.
#[derive(Debug, Clone, Default)]
pub struct GreedyDispatch {
    /// robot -> target
    assigned: BTreeMap<RobotId, RobotId>,
}

impl GreedyDispatch {
    pub fn new() -> Self {
        Self::default()
    }

    fn dispatch(&mut self, view: &SimView<'_>) -> Plan {
        let frozen = view.frozen_ids();
        let mut plan = Plan::new();
        let stale: Vec<RobotId> = self
            .assigned
            .iter()
            .filter(|(_, t)| !frozen.contains(t))
            .map(|(&r, _)| r)
            .collect();
        for r in &stale {
            self.assigned.remove(r);
            plan.set(*r, Vec::new());
        }

        let m = view.metric();
        let mut idle: Vec<RobotId> = view
            .active_ids()
            .into_iter()
            .filter(|r| !self.assigned.contains_key(r))
            .collect();
        let mut open: Vec<RobotId> = frozen
            .into_iter()
            .filter(|t| !self.assigned.values().any(|a| a == t))
            .collect();
        while !idle.is_empty() && !open.is_empty() {
            let mut best: Option<(f64, RobotId, RobotId)> = None;
            for &t in &open {
                let home = view.home(t).expect("released robot");
                for &r in &idle {
                    let here = view.position(r).expect("active robot");
                    let d = m.distance(here, home).expect("valid points");
                    let better = match best {
                        None => true,
                        Some((bd, bt, br)) => d < bd || (d == bd && (t, r) < (bt, br)),
                    };
                    if better {
                        best = Some((d, t, r));
                    }
                }
            }
            let (_, t, r) = best.expect("nonempty candidates");
            self.assigned.insert(r, t);
            plan.set(r, vec![Leg::GoTo(view.home(t).expect("released robot"))]);
            idle.retain(|&x| x != r);
            open.retain(|&x| x != t);
        }
        plan
    }
}

impl Strategy for GreedyDispatch {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn on_release(&mut self, view: &SimView<'_>, _robot: RobotId) -> Result<Plan, StrategyError> {
        Ok(self.dispatch(view))
    }

    fn on_wake(&mut self, view: &SimView<'_>, _robot: RobotId) -> Result<Option<Plan>, StrategyError> {
        let plan = self.dispatch(view);
        Ok((!plan.is_empty()).then_some(plan))
    }
}
