use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::{Context, SearchState, Status};
use crate::instance::Node;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalStrategy {
    SequenceNearest,
    Sparsification,
    PriorityDelta,
    RegionBased,
    WorstAngle,
}

impl RemovalStrategy {
    pub const ALL: [RemovalStrategy; 5] = [
        RemovalStrategy::SequenceNearest,
        RemovalStrategy::Sparsification,
        RemovalStrategy::PriorityDelta,
        RemovalStrategy::RegionBased,
        RemovalStrategy::WorstAngle,
    ];
}

/// Per-iteration draws of a destroy step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RemoveParams {
    /// Neighborhood size `nh`.
    pub nh: usize,
    /// Segment-length fraction `υ`.
    pub upsilon: f64,
    /// Determinism exponent of rank-based selection.
    pub det: f64,
    pub d_limit: f64,
}

/// Rank-randomized pick `⌊p^det · len⌋` from a sorted list.
fn ranked<R: Rng + ?Sized>(len: usize, det: f64, rng: &mut R) -> usize {
    let p: f64 = rng.random();
    ((p.powf(det) * len as f64) as usize).min(len - 1)
}

/// Destroys part of a complete solution: `⌈|S|/|V|·nh⌉` planned targets are
/// taken off their routes (one fewer when that would leave no room for an
/// unvisited target), then unvisited targets are opened until `nh`
/// targets are open, skipping any that no vehicle could absorb within its
/// free capacity. Returns the number of open targets.
pub fn remove<R: Rng + ?Sized>(
    ctx: &Context,
    st: &mut SearchState,
    strategy: RemovalStrategy,
    params: &RemoveParams,
    rng: &mut R,
) -> usize {
    let n = st.status.len();
    if n == 0 {
        return 0;
    }
    let nh = params.nh.min(n);
    let planned = st.num_planned();
    let mut nh_p = ((planned as f64 / n as f64 * nh as f64).ceil() as usize).min(planned);
    // Keep one slot for an unvisited target; with the plain proportional
    // split a nearly complete solution could never reopen its last targets.
    if planned < n && nh_p == nh && nh > 1 {
        nh_p -= 1;
    }
    let nv = ctx.inst.num_vehicles().max(1);
    let seg_len = ((params.upsilon * planned as f64 / nv as f64) as usize).max(1);

    let segments = match strategy {
        RemovalStrategy::SequenceNearest => sequence_routed(ctx, st, nh_p, seg_len, rng),
        RemovalStrategy::Sparsification => sparsify_routed(ctx, st, nh_p, seg_len, rng),
        RemovalStrategy::PriorityDelta => {
            let mut list = st.planned();
            let loss: Vec<f64> = list.iter().map(|&i| ctx.model.loss(&st.obj, i)).collect();
            sort_by_key(&mut list, &loss, false);
            take_ranked(ctx, st, list, nh_p, params.det, rng);
            Vec::new()
        }
        RemovalStrategy::RegionBased => {
            let mut list = Vec::new();
            let mut ratio = Vec::new();
            for m in 0..st.routes.len() {
                for k in 0..st.routes[m].len() {
                    let i = st.routes[m][k];
                    list.push(i);
                    ratio.push(st.removal_saving(ctx.inst, m, k) / region_mass(ctx, i, params.d_limit));
                }
            }
            // Worst cost-benefit first.
            sort_by_key(&mut list, &ratio, true);
            take_ranked(ctx, st, list, nh_p, params.det, rng);
            Vec::new()
        }
        RemovalStrategy::WorstAngle => {
            worst_angle_routed(ctx, st, nh_p);
            Vec::new()
        }
    };

    let mut open = st.status.iter().filter(|s| **s == Status::Open).count();
    if open >= nh {
        return open;
    }
    let admissible = |st: &SearchState, i: usize| st.best_slot(ctx.inst, i).is_some();
    let admit = |st: &mut SearchState, i: usize, open: &mut usize| {
        if st.status[i] == Status::Unvisited && admissible(st, i) {
            st.status[i] = Status::Open;
            *open += 1;
        }
    };
    let unvisited = st.unvisited();
    match strategy {
        RemovalStrategy::SequenceNearest | RemovalStrategy::Sparsification => {
            let anchors: Vec<Vec<usize>> = if strategy == RemovalStrategy::SequenceNearest {
                segments
            } else {
                segments.iter().filter(|s| !s.is_empty()).map(|s| vec![s[rng.random_range(0..s.len())]]).collect()
            };
            let lists: Vec<Vec<usize>> = anchors
                .iter()
                .map(|seg| {
                    let d: Vec<f64> = unvisited
                        .iter()
                        .map(|&u| seg.iter().map(|&a| ctx.inst.dist(u, a)).fold(f64::INFINITY, f64::min))
                        .collect();
                    let mut l = unvisited.clone();
                    sort_by_key(&mut l, &d, false);
                    l
                })
                .collect();
            let mut cursor = vec![0; lists.len()];
            while open < nh {
                let mut progressed = false;
                for (s, list) in lists.iter().enumerate() {
                    while cursor[s] < list.len() {
                        let i = list[cursor[s]];
                        cursor[s] += 1;
                        if st.status[i] == Status::Unvisited {
                            progressed = true;
                            admit(st, i, &mut open);
                            break;
                        }
                    }
                    if open >= nh {
                        break;
                    }
                }
                if !progressed {
                    break;
                }
            }
        }
        RemovalStrategy::PriorityDelta => {
            let mut list = unvisited;
            let gain: Vec<f64> = list.iter().map(|&i| ctx.model.gain(&st.obj, i)).collect();
            sort_by_key(&mut list, &gain, true);
            while open < nh && !list.is_empty() {
                let i = list.remove(ranked(list.len(), params.det, rng));
                admit(st, i, &mut open);
            }
        }
        RemovalStrategy::RegionBased => {
            let mut list = Vec::new();
            let mut ratio = Vec::new();
            for &i in &unvisited {
                if let Some(slot) = st.best_slot(ctx.inst, i) {
                    list.push(i);
                    ratio.push(slot.detour / region_mass(ctx, i, params.d_limit));
                }
            }
            sort_by_key(&mut list, &ratio, false);
            while open < nh && !list.is_empty() {
                let i = list.remove(ranked(list.len(), params.det, rng));
                admit(st, i, &mut open);
            }
        }
        RemovalStrategy::WorstAngle => {
            let mut list = unvisited;
            list.shuffle(rng);
            for i in list {
                if open >= nh {
                    break;
                }
                admit(st, i, &mut open);
            }
        }
    }
    open
}

/// Stable sort of `items` by the aligned `keys`.
fn sort_by_key(items: &mut Vec<usize>, keys: &[f64], descending: bool) {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.sort_by(|&a, &b| {
        let o = keys[a].total_cmp(&keys[b]);
        if descending {
            o.reverse()
        } else {
            o
        }
    });
    *items = idx.into_iter().map(|k| items[k]).collect();
}

fn take_ranked<R: Rng + ?Sized>(ctx: &Context, st: &mut SearchState, mut list: Vec<usize>, quota: usize, det: f64, rng: &mut R) {
    for _ in 0..quota {
        if list.is_empty() {
            break;
        }
        let i = list.remove(ranked(list.len(), det, rng));
        st.unplan(ctx, i);
    }
}

/// Total value within `d_limit` of `i` (including `i`), never zero.
fn region_mass(ctx: &Context, i: usize, d_limit: f64) -> f64 {
    let values = ctx.model.values();
    ctx.within(i, d_limit).map(|j| values[j]).sum::<f64>().max(1e-12)
}

/// Removes consecutive stops starting at random planned targets.
fn sequence_routed<R: Rng + ?Sized>(
    ctx: &Context,
    st: &mut SearchState,
    quota: usize,
    seg_len: usize,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    let mut segments = Vec::new();
    let mut removed = 0;
    while removed < quota {
        let planned = st.planned();
        if planned.is_empty() {
            break;
        }
        let start = planned[rng.random_range(0..planned.len())];
        let Status::Planned(m) = st.status[start] else { unreachable!() };
        let k = st.routes[m].iter().position(|&x| x == start).expect("planned target is on its route");
        let mut seg = Vec::new();
        while removed < quota && seg.len() < seg_len && k < st.routes[m].len() {
            let i = st.routes[m][k];
            st.unplan(ctx, i);
            seg.push(i);
            removed += 1;
        }
        segments.push(seg);
    }
    segments
}

/// Removes segments from one random route at a time, keeping a single stop
/// between consecutive segments.
fn sparsify_routed<R: Rng + ?Sized>(
    ctx: &Context,
    st: &mut SearchState,
    quota: usize,
    seg_len: usize,
    rng: &mut R,
) -> Vec<Vec<usize>> {
    let mut segments = Vec::new();
    let mut removed = 0;
    let mut touched = vec![false; st.routes.len()];
    while removed < quota {
        let mut candidates: Vec<usize> =
            (0..st.routes.len()).filter(|&m| !touched[m] && !st.routes[m].is_empty()).collect();
        if candidates.is_empty() {
            candidates = (0..st.routes.len()).filter(|&m| !st.routes[m].is_empty()).collect();
        }
        let Some(&m) = candidates.get(rng.random_range(0..candidates.len().max(1))) else {
            break;
        };
        touched[m] = true;
        let mut k = rng.random_range(0..st.routes[m].len());
        while removed < quota && k < st.routes[m].len() {
            let mut seg = Vec::new();
            while removed < quota && seg.len() < seg_len && k < st.routes[m].len() {
                let i = st.routes[m][k];
                st.unplan(ctx, i);
                seg.push(i);
                removed += 1;
            }
            segments.push(seg);
            k += 1;
        }
    }
    segments
}

/// Interior angle (radians) at stop `k` of route `m`; degenerate corners
/// count as straight.
fn angle_at(ctx: &Context, st: &SearchState, m: usize, k: usize) -> f64 {
    let inst = ctx.inst;
    let p = inst.location(st.node(inst, m, k));
    let c = inst.location(Node::Target(st.routes[m][k]));
    let q = inst.location(st.node(inst, m, k + 2));
    let (ax, ay, bx, by) = (p.x - c.x, p.y - c.y, q.x - c.x, q.y - c.y);
    let (na, nb) = (ax.hypot(ay), bx.hypot(by));
    if na == 0.0 || nb == 0.0 {
        return std::f64::consts::PI;
    }
    ((ax * bx + ay * by) / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Repeatedly removes the three stops forming the sharpest corner.
fn worst_angle_routed(ctx: &Context, st: &mut SearchState, quota: usize) {
    let mut removed = 0;
    while removed < quota {
        let mut worst: Option<(f64, usize, usize)> = None;
        for m in 0..st.routes.len() {
            for k in 0..st.routes[m].len() {
                let a = angle_at(ctx, st, m, k);
                if worst.is_none_or(|w| a < w.0) {
                    worst = Some((a, m, k));
                }
            }
        }
        let Some((_, m, k)) = worst else { break };
        let r = &st.routes[m];
        let mut trio = vec![r[k]];
        if k > 0 {
            trio.push(r[k - 1]);
        }
        if k + 1 < r.len() {
            trio.push(r[k + 1]);
        }
        for i in trio {
            if removed == quota {
                break;
            }
            st.unplan(ctx, i);
            removed += 1;
        }
    }
}
