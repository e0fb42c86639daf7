use super::{OfflineSolution, Problem};
use crate::instance::Instance;

/// A feasible schedule: repeatedly the earliest-free awake robot is sent to
/// the nearest frozen robot not yet assigned (ties broken by lower index).
pub fn greedy_upper_bound(inst: &Instance) -> OfflineSolution {
    let p = Problem::new(inst);
    let mut awake = p.active.clone();
    let mut pos: Vec<usize> = (0..p.n).collect();
    let mut free = vec![0.0f64; p.n];
    let mut assigned = p.active.clone();
    let mut plan = Vec::new();

    while assigned.iter().any(|a| !a) {
        let w = (0..p.n)
            .filter(|&w| awake[w])
            .min_by(|&a, &b| free[a].total_cmp(&free[b]).then(a.cmp(&b)))
            .expect("at least one awake robot");
        let j = (0..p.n)
            .filter(|&j| !assigned[j])
            .min_by(|&a, &b| p.d(pos[w], a).total_cmp(&p.d(pos[w], b)).then(a.cmp(&b)))
            .expect("an unassigned robot");
        let t = (free[w] + p.d(pos[w], j)).max(p.release[j]);
        plan.push((w, j, t));
        assigned[j] = true;
        awake[j] = true;
        pos[w] = j;
        free[w] = t;
        free[j] = t;
    }
    OfflineSolution::from_assignments(&p, &plan)
}
