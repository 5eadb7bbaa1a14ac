#![allow(dead_code)]

use gcortop::instance::{Instance, Location, MotionModel, Node, Vehicle};
use gcortop::objective::ObjectiveModel;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` targets on distinct cells of a `side × side` grid with 100 m spacing,
/// integer priorities in 1..=20, one shared depot below the grid corner.
pub fn random_instance(seed: u64, n: usize, side: usize, vehicles: usize, t_max: f64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<usize> = (0..side * side).collect();
    cells.shuffle(&mut rng);
    let targets = cells[..n]
        .iter()
        .enumerate()
        .map(|(k, &c)| Location::new(k, 100.0 * (c % side) as f64, 100.0 * (c / side) as f64))
        .collect();
    let priorities = (0..n).map(|_| rng.random_range(1..=20) as f64).collect();
    let vehicles = (0..vehicles).map(|id| Vehicle { id, start: 0, end: 0, t_max }).collect();
    Instance::new(
        format!("rand-{seed}"),
        targets,
        priorities,
        vec![Location::new(0, 0.0, -100.0)],
        vehicles,
        MotionModel::uav(7.0, 2.0),
        2.0,
    )
    .unwrap()
}

/// Shortest duration of vehicle `m` visiting exactly `mask`, for every mask
/// (Held–Karp); infinity when the budget is exceeded.
pub fn subset_durations(inst: &Instance, m: usize) -> Vec<f64> {
    let n = inst.num_targets();
    let full = 1usize << n;
    let (s, e) = (inst.start_of(m), inst.end_of(m));
    let mut dp = vec![f64::INFINITY; full * n];
    for j in 0..n {
        dp[(1 << j) * n + j] = inst.arc_time(s, Node::Target(j));
    }
    for mask in 1..full {
        for last in 0..n {
            let t = dp[mask * n + last];
            if !t.is_finite() || mask >> last & 1 == 0 {
                continue;
            }
            for k in 0..n {
                if mask >> k & 1 == 0 {
                    let nm = mask | 1 << k;
                    let v = t + inst.arc_time(Node::Target(last), Node::Target(k));
                    if v < dp[nm * n + k] {
                        dp[nm * n + k] = v;
                    }
                }
            }
        }
    }
    let t_max = inst.vehicles[m].t_max;
    let mut out = vec![f64::INFINITY; full];
    out[0] = inst.arc_time(s, e);
    for mask in 1..full {
        for last in 0..n {
            let t = dp[mask * n + last] + inst.arc_time(Node::Target(last), e);
            if t < out[mask] {
                out[mask] = t;
            }
        }
    }
    for t in &mut out {
        if *t > t_max + 1e-9 {
            *t = f64::INFINITY;
        }
    }
    out
}

fn mask_vec(mask: usize, n: usize) -> Vec<bool> {
    (0..n).map(|k| mask >> k & 1 == 1).collect()
}

/// Optimal objective by enumerating disjoint per-vehicle subsets.
pub fn brute_force(inst: &Instance, model: &ObjectiveModel) -> f64 {
    brute_force_with_cost(inst, model).0
}

/// Optimal objective and the least total duration achieving it.
pub fn brute_force_with_cost(inst: &Instance, model: &ObjectiveModel) -> (f64, f64) {
    let n = inst.num_targets();
    let tables: Vec<Vec<f64>> = (0..inst.num_vehicles()).map(|m| subset_durations(inst, m)).collect();
    let mut best = (f64::NEG_INFINITY, f64::INFINITY);
    fn rec(m: usize, used: usize, cost: f64, n: usize, tables: &[Vec<f64>], model: &ObjectiveModel, best: &mut (f64, f64)) {
        if m == tables.len() {
            let v = model.evaluate(&mask_vec(used, n));
            if v > best.0 + 1e-9 || (v >= best.0 - 1e-9 && cost < best.1) {
                *best = (v.max(best.0), cost);
            }
            return;
        }
        let free = ((1usize << n) - 1) & !used;
        let mut sub = free;
        loop {
            if tables[m][sub].is_finite() {
                rec(m + 1, used | sub, cost + tables[m][sub], n, tables, model, best);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
    }
    rec(0, 0, 0.0, n, &tables, model, &mut best);
    best
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn coin(rng: &mut ChaCha8Rng, p: f64) -> bool {
    rng.random_bool(p)
}
