//! Two-phase multi-start adaptive large neighborhood search (2MLS).
//!
//! Phase 1 builds several starting solutions on simplified representations
//! (grid aggregation or per-vehicle decomposition), each seeded with
//! k-means++ and improved by a short ALNS run. Phase 2 runs the ALNS on the
//! full problem from the best start. The search maximizes `I(S) − ρ·ΣT_m`,
//! so that among equally informative missions the shorter one wins.

mod acceptance;
mod adaptive;
mod config;
mod insertion;
mod reduce;
mod removal;
mod search;
mod seed;
mod state;

pub use acceptance::{accept, Temperature, PSI0};
pub use adaptive::{adapt_weights, Outcome, StrategyStats};
pub use config::{NhBound, Phase1Strategy, SearchConfig};
pub use insertion::{insert, InsertParams, InsertionStrategy};
pub use reduce::{aggregate_grid, decompose_vehicles, Aggregation};
pub use removal::{remove, RemovalStrategy, RemoveParams};
pub use search::AlnsStats;
pub use seed::seed_routes;
pub use state::{Context, SearchState, Slot, Status};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{Instance, Route, Solution};
use crate::objective::ObjectiveModel;

/// Cell group sizes cycled through by the aggregation starts.
const GROUPS: [usize; 3] = [4, 6, 9];

/// Summary of a 2MLS run.
#[derive(Clone, Debug)]
pub struct SearchReport {
    pub solution: Solution,
    /// `I(S)` of the returned solution under the pure model.
    pub objective: f64,
    /// Weighted value of every start after Phase 1, on the full problem.
    pub start_values: Vec<f64>,
    pub phase2: AlnsStats,
}

/// Runs 2MLS and returns the final mission.
///
/// When `model.rho` is zero the instance default ρ is used for the search.
/// The result depends only on `(inst, model, cfg, seed)`.
pub fn run_2mls(inst: &Instance, model: &ObjectiveModel, cfg: &SearchConfig, seed: u64) -> Result<Solution> {
    Ok(run_2mls_report(inst, model, cfg, seed)?.solution)
}

pub fn run_2mls_report(inst: &Instance, model: &ObjectiveModel, cfg: &SearchConfig, seed: u64) -> Result<SearchReport> {
    cfg.validate()?;
    if model.num_targets() != inst.num_targets() {
        return Err(Error::InvalidParameter(format!(
            "model has {} targets, instance {}",
            model.num_targets(),
            inst.num_targets()
        )));
    }
    let weighted;
    let model = if model.rho > 0.0 {
        model
    } else {
        weighted = model.clone().weighted(inst);
        &weighted
    };

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let start_seeds: Vec<u64> = (0..cfg.multistarts).map(|_| master.random()).collect();
    let phase2_seed: u64 = master.random();

    let starts: Vec<Solution> = start_seeds
        .par_iter()
        .enumerate()
        .map(|(k, &s)| phase1_start(inst, model, cfg, k, s))
        .collect::<Result<_>>()?;
    let start_values: Vec<f64> = starts.iter().map(|s| model.weighted_value(s)).collect();
    let best = (0..starts.len())
        .max_by(|&a, &b| {
            start_values[a]
                .total_cmp(&start_values[b])
                .then(starts[b].total_duration().total_cmp(&starts[a].total_duration()))
                .then(b.cmp(&a))
        })
        .expect("at least one start");

    let ctx = Context::new(inst, model);
    let init = SearchState::from_solution(&ctx, &starts[best]);
    let mut rng = ChaCha8Rng::seed_from_u64(phase2_seed);
    let (final_state, phase2) = search::alns(&ctx, cfg, init, cfg.phase2_iters, &mut rng);
    let solution = final_state.to_solution(inst);
    debug_assert!(inst.check_solution(&solution).is_ok());
    let objective = model.evaluate(&solution.sampled_mask(inst.num_targets()));
    Ok(SearchReport { solution, objective, start_values, phase2 })
}

fn phase1_start(inst: &Instance, model: &ObjectiveModel, cfg: &SearchConfig, k: usize, seed: u64) -> Result<Solution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if cfg.phase1_strategy == Phase1Strategy::Aggregation {
        if let Some(agg) = aggregate_grid(inst, model.values(), GROUPS[k % GROUPS.len()])? {
            let sub_model = model.reduced(&agg.instance, &agg.representatives, agg.values.clone());
            let sol = construct_and_improve(&agg.instance, &sub_model, cfg, None, &mut rng);
            return Ok(agg.lift(inst, &sol));
        }
    }

    let seeds = seed_routes(inst, &mut rng);
    let parts = decompose_vehicles(inst, &seeds);
    let mut routes = Vec::with_capacity(inst.num_vehicles());
    for (m, part) in parts.iter().enumerate() {
        if part.is_empty() {
            routes.push(Route::empty(m, inst));
            continue;
        }
        let sub = inst.single_vehicle(m, part)?;
        let values = part.iter().map(|&i| model.values()[i]).collect();
        let sub_model = model.reduced(&sub, part, values);
        let local_seed = seeds[m].and_then(|s| part.iter().position(|&i| i == s));
        let sol = construct_and_improve(&sub, &sub_model, cfg, Some(vec![local_seed]), &mut rng);
        let stops = sol.routes[0].stops.iter().map(|&i| part[i]).collect();
        routes.push(Route::with_stops(m, stops, inst));
    }
    Ok(Solution { routes })
}

/// Seeds every route, completes the solution with a random insertion
/// strategy and improves it with a Phase-1 ALNS run.
fn construct_and_improve<R: Rng + ?Sized>(
    inst: &Instance,
    model: &ObjectiveModel,
    cfg: &SearchConfig,
    seeds: Option<Vec<Option<usize>>>,
    rng: &mut R,
) -> Solution {
    let ctx = Context::new(inst, model);
    let seeds = seeds.unwrap_or_else(|| seed_routes(inst, rng));
    let mut st = SearchState::empty(&ctx);
    for (m, s) in seeds.into_iter().enumerate() {
        if let Some(slot) = s.and_then(|i| st.best_slots(inst, i, m, 1).first().copied().map(|sl| (i, sl))) {
            st.insert(&ctx, slot.0, slot.1);
        }
    }
    for s in st.status.iter_mut() {
        if *s == Status::Unvisited {
            *s = Status::Open;
        }
    }
    let strategy = InsertionStrategy::ALL[rng.random_range(0..InsertionStrategy::ALL.len())];
    let params = search::insert_params(&ctx, cfg, rng);
    insert(&ctx, &mut st, strategy, &params, None, rng);
    let (best, _) = search::alns(&ctx, cfg, st, cfg.phase1_iters, rng);
    best.to_solution(inst)
}
