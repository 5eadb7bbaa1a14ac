use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::acceptance::Temperature;
use super::adaptive::{adapt_weights, Outcome, StrategyStats};
use super::config::SearchConfig;
use super::insertion::{insert, InsertParams, InsertionStrategy};
use super::removal::{remove, RemovalStrategy, RemoveParams};
use super::state::{Context, SearchState};

/// Counters of one ALNS run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AlnsStats {
    pub iterations: usize,
    pub new_best: usize,
    pub accepted: usize,
    /// Constructions aborted by the acceptance-threshold bound.
    pub pruned: usize,
}

pub(crate) fn insert_params<R: Rng + ?Sized>(ctx: &Context, cfg: &SearchConfig, rng: &mut R) -> InsertParams {
    let (lo, hi) = ctx.d_limit_range();
    InsertParams {
        p_rand: cfg.p_rand,
        q: *cfg.q_choices.choose(rng).expect("validated non-empty"),
        d_limit: if hi > lo { rng.random_range(lo..=hi) } else { lo },
        regret_n: cfg.regret_n,
    }
}

/// Adaptive large neighborhood search from `init`; returns the best state
/// found. Each iteration draws its operator randomness from a generator
/// seeded by the main stream, so aborting a construction early does not
/// shift later iterations.
pub(crate) fn alns<R: Rng + ?Sized>(
    ctx: &Context,
    cfg: &SearchConfig,
    init: SearchState,
    iters: usize,
    rng: &mut R,
) -> (SearchState, AlnsStats) {
    let n = ctx.inst.num_targets();
    let mut stats = AlnsStats::default();
    if n == 0 {
        return (init, stats);
    }
    let (nh_lo, nh_hi) = cfg.nh_bounds(n);
    let (u_lo, u_hi) = cfg.upsilon_range;
    let mut current = init;
    let mut cur_val = current.weighted_value(ctx);
    let mut best = current.clone();
    let mut best_val = cur_val;
    let mut temp = Temperature::calibrated(0.01 * current.obj.value, cfg.kappa);
    let mut rem = StrategyStats::new(RemovalStrategy::ALL.len());
    let mut ins = StrategyStats::new(InsertionStrategy::ALL.len());
    let mut since_best = 0;

    for it in 0..iters {
        if since_best >= cfg.convergence_limit {
            break;
        }
        stats.iterations += 1;
        let r = rem.select(rng);
        let s = ins.select(rng);
        let p = 1.0 - rng.random::<f64>();
        let threshold = temp.threshold(best_val, p);
        let mut op_rng = ChaCha8Rng::seed_from_u64(rng.random());

        let ip = insert_params(ctx, cfg, &mut op_rng);
        let rp = RemoveParams {
            nh: op_rng.random_range(nh_lo..=nh_hi),
            upsilon: op_rng.random_range(u_lo..=u_hi),
            det: cfg.det,
            d_limit: ip.d_limit,
        };
        let mut cand = current.clone();
        remove(ctx, &mut cand, RemovalStrategy::ALL[r], &rp, &mut op_rng);
        let done = insert(ctx, &mut cand, InsertionStrategy::ALL[s], &ip, cfg.prune.then_some(threshold), &mut op_rng);

        let tol = 1e-9 * best_val.abs().max(1.0);
        let (outcome, v) = if done {
            let v = cand.weighted_value(ctx);
            debug_assert_eq!(cand.check(ctx), Ok(()));
            let o = if v > best_val + tol {
                Outcome::NewBest
            } else if v >= threshold {
                if v > cur_val + tol {
                    Outcome::Better
                } else {
                    Outcome::AcceptedWorse
                }
            } else {
                Outcome::Rejected
            };
            (o, v)
        } else {
            stats.pruned += 1;
            (Outcome::Rejected, f64::NEG_INFINITY)
        };
        match outcome {
            Outcome::NewBest => {
                best = cand.clone();
                best_val = v;
                current = cand;
                cur_val = v;
                temp.reset();
                since_best = 0;
                stats.new_best += 1;
                stats.accepted += 1;
            }
            Outcome::Better | Outcome::AcceptedWorse => {
                current = cand;
                cur_val = v;
                temp.heat_up();
                since_best += 1;
                stats.accepted += 1;
            }
            Outcome::Rejected => {
                temp.heat_up();
                since_best += 1;
            }
        }
        rem.record(r, outcome, &cfg.sigma);
        ins.record(s, outcome, &cfg.sigma);
        if (it + 1) % cfg.segment_size == 0 {
            adapt_weights(&mut rem, cfg.reaction);
            adapt_weights(&mut ins, cfg.reaction);
        }
    }
    (best, stats)
}
