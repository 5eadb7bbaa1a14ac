use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::{Context, SearchState, Slot, Status};
use crate::objective::BoundTracker;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsertionStrategy {
    MaxMarginal,
    BestRatio,
    RegionInsert,
    CostGreedy,
    Regret,
}

impl InsertionStrategy {
    pub const ALL: [InsertionStrategy; 5] = [
        InsertionStrategy::MaxMarginal,
        InsertionStrategy::BestRatio,
        InsertionStrategy::RegionInsert,
        InsertionStrategy::CostGreedy,
        InsertionStrategy::Regret,
    ];
}

/// Per-iteration draws and settings of a repair step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InsertParams {
    pub p_rand: f64,
    /// Exponent of the marginal benefit in the ratio strategy.
    pub q: f64,
    /// Region radius for the region strategy.
    pub d_limit: f64,
    pub regret_n: usize,
}

/// Repairs `st` by placing every open target at its cheapest feasible slot
/// (or declaring it unvisited), one at a time in the order the strategy
/// prefers.
///
/// With a `threshold`, construction stops as soon as the bound on the final
/// weighted value drops below it; the state is then left partial and `false`
/// is returned.
pub fn insert<R: Rng + ?Sized>(
    ctx: &Context,
    st: &mut SearchState,
    strategy: InsertionStrategy,
    params: &InsertParams,
    threshold: Option<f64>,
    rng: &mut R,
) -> bool {
    let inst = ctx.inst;
    let model = ctx.model;
    let nv = inst.num_vehicles();
    let k_slots = if strategy == InsertionStrategy::Regret { params.regret_n.max(1) } else { 1 };
    let open = st.open();
    let mut cache: Vec<Vec<Vec<Slot>>> =
        open.iter().map(|&i| (0..nv).map(|m| st.best_slots(inst, i, m, k_slots)).collect()).collect();
    let mut bound = threshold.map(|_| {
        let mask: Vec<bool> = st.status.iter().map(|s| *s == Status::Unvisited).collect();
        BoundTracker::new(model, &mask)
    });
    let mut alive: Vec<usize> = (0..open.len()).collect();

    loop {
        alive.retain(|&k| {
            if cache[k].iter().any(|s| !s.is_empty()) {
                return true;
            }
            st.status[open[k]] = Status::Unvisited;
            if let Some(b) = bound.as_mut() {
                b.mark_unvisited(model, open[k]);
            }
            false
        });
        if let (Some(b), Some(th)) = (&bound, threshold) {
            // The slack absorbs rounding differences between the bound and
            // the incrementally maintained objective.
            if b.value() - model.rho * st.total_duration() < th - 1e-9 * th.abs().max(1.0) {
                return false;
            }
        }
        if alive.is_empty() {
            return true;
        }

        let pick = if rng.random::<f64>() < params.p_rand {
            rng.random_range(0..alive.len())
        } else {
            choose(ctx, st, strategy, params, &open, &alive, &cache)
        };
        let k = alive.remove(pick);
        let i = open[k];
        let slot = cheapest(&cache[k]).expect("alive targets have a slot");
        st.insert(ctx, i, slot);
        let m = slot.route;
        for &k in &alive {
            cache[k][m] = st.best_slots(inst, open[k], m, k_slots);
        }
    }
}

fn cheapest(slots: &[Vec<Slot>]) -> Option<Slot> {
    slots.iter().filter_map(|s| s.first()).min_by(|a, b| a.detour.total_cmp(&b.detour)).copied()
}

/// The `n`-th cheapest slot over all routes (1-based).
fn nth_slot(slots: &[Vec<Slot>], n: usize) -> Option<f64> {
    let mut all: Vec<f64> = slots.iter().flatten().map(|s| s.detour).collect();
    if all.len() < n {
        return None;
    }
    all.sort_by(f64::total_cmp);
    Some(all[n - 1])
}

/// Position in `alive` of the strategy's choice. Higher key wins; ties go to
/// the higher value `u_i`, then to the lower index.
fn choose(
    ctx: &Context,
    st: &SearchState,
    strategy: InsertionStrategy,
    params: &InsertParams,
    open: &[usize],
    alive: &[usize],
    cache: &[Vec<Vec<Slot>>],
) -> usize {
    let model = ctx.model;
    let key = |k: usize| -> f64 {
        let i = open[k];
        let d1 = cheapest(&cache[k]).map_or(f64::INFINITY, |s| s.detour);
        let dpos = d1.max(1e-9);
        match strategy {
            InsertionStrategy::MaxMarginal => model.gain(&st.obj, i),
            InsertionStrategy::BestRatio => model.gain(&st.obj, i).max(0.0).powf(params.q) / dpos,
            InsertionStrategy::RegionInsert => {
                let mass: f64 = ctx.within(i, params.d_limit).map(|j| model.remaining_priority(&st.obj, j)).sum();
                mass / dpos
            }
            InsertionStrategy::CostGreedy => -d1,
            InsertionStrategy::Regret => {
                let g = model.gain(&st.obj, i);
                let delta1 = g - model.rho * d1;
                let deltan = nth_slot(&cache[k], params.regret_n).map_or(0.0, |d| g - model.rho * d);
                (deltan - delta1).abs()
            }
        }
    };
    let mut best = 0;
    let mut best_key = key(alive[0]);
    for (p, &k) in alive.iter().enumerate().skip(1) {
        let kk = key(k);
        let better = match kk.total_cmp(&best_key) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => {
                let (a, b) = (model.values()[open[k]], model.values()[open[alive[best]]]);
                a > b
            }
        };
        if better {
            best = p;
            best_key = kk;
        }
    }
    best
}
