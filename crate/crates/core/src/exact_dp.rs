//! Bidirectional labeling algorithm for small instances.
//!
//! Forward labels build the routes of vehicles `0..=m_fw` starting at their
//! start depots, backward labels build vehicles `m_bw..|M|` from their end
//! depots towards the start. With an odd fleet the middle vehicle is shared:
//! each direction may spend at most half its budget on it and the two halves
//! are glued by one connecting arc at join time.
//!
//! The objective is only evaluated on complete candidates, memoized by visited
//! set. Pairs are scanned in decreasing order of `I(S_fw) + I(S_bw)`, which
//! bounds `I(S_fw ∪ S_bw)` from above because every supported model is
//! monotone and submodular.
//!
//! A forward and a backward label may share targets. Superset dominance and
//! the close-only-when-full rule each treat the two sweeps as independent, and
//! insisting on disjoint joins would then lose optima (four targets, three
//! vehicles and a 40 s budget already suffice). An overlapping join is a
//! mission that samples some target twice; dropping the second visit keeps
//! the sampled set and never lengthens a route, so the join scores the union
//! and de-duplicates when it builds the routes.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::instance::{Instance, Node, Route, Solution, FEASIBILITY_TOL};
use crate::objective::{ObjectiveModel, ObjectiveState};

const VALUE_TOL: f64 = 1e-9;

/// Fixed-width bitset over target indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VisitSet(SmallVec<[u64; 2]>);

impl VisitSet {
    pub fn new(n: usize) -> Self {
        VisitSet(SmallVec::from_elem(0, n.div_ceil(64).max(1)))
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn is_superset(&self, other: &VisitSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| b & !a == 0)
    }

    pub fn is_disjoint(&self, other: &VisitSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == 0)
    }

    pub fn union(&self, other: &VisitSet) -> VisitSet {
        VisitSet(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(64 * k + b)
            })
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// A partial solution `(S, m, T_m, i)`.
#[derive(Clone, Debug)]
pub struct Label {
    pub visited: VisitSet,
    pub vehicle: usize,
    pub elapsed: f64,
    pub at: Node,
    pub parent: Option<usize>,
    /// Summed durations of the vehicles this label has already finished.
    pub completed: f64,
}

/// Whether `a` makes `b` redundant. Both labels must sit at the same node
/// and belong to the same sweep.
pub fn dominates(a: &Label, b: &Label, dir: Direction) -> bool {
    debug_assert_eq!(a.at, b.at);
    let earlier = match dir {
        Direction::Forward => a.vehicle < b.vehicle,
        Direction::Backward => a.vehicle > b.vehicle,
    };
    if earlier {
        return a.visited.is_superset(&b.visited);
    }
    a.vehicle == b.vehicle
        && ((a.elapsed == b.elapsed && a.visited.is_superset(&b.visited))
            || (a.elapsed < b.elapsed && a.visited == b.visited))
}

/// Last forward and first backward vehicle index: `(m_fw, m_bw)`.
///
/// When they coincide the vehicle is shared and each direction may use at
/// most half of its budget.
pub fn extension_limits(num_vehicles: usize) -> (usize, usize) {
    assert!(num_vehicles >= 1);
    let m_fw = num_vehicles.div_ceil(2) - 1;
    (m_fw, num_vehicles - m_fw - 1)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DominanceMode {
    #[default]
    Full,
    /// Keep every label; only useful to validate the dominance rules.
    None,
}

#[derive(Clone, Debug)]
pub struct ExactConfig {
    pub time_limit: Option<Duration>,
    pub dominance: DominanceMode,
    /// Pairs examined while looking for a shorter mission of the optimal
    /// informativeness. Saturated coverage can make almost every pair
    /// optimal, so the duration tie-break is capped; `None` removes the cap.
    pub tie_break_pairs: Option<usize>,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig { time_limit: None, dominance: DominanceMode::Full, tie_break_pairs: Some(2_000_000) }
    }
}

#[derive(Clone, Debug, Default)]
pub struct DpStats {
    pub forward_labels: usize,
    pub backward_labels: usize,
    /// Pairs scanned for the best informativeness.
    pub join_pairs: usize,
    /// Pairs scanned for the shortest mission at that informativeness.
    pub tie_break_pairs: usize,
    /// Objective evaluations actually computed (memo misses).
    pub evaluations: usize,
    /// Objective queries answered, including memo hits.
    pub lookups: usize,
}

#[derive(Clone, Debug)]
pub struct ExactResult {
    pub solution: Solution,
    pub objective: f64,
    /// False when the time limit cut the search short.
    pub optimal: bool,
    pub stats: DpStats,
}

pub fn solve_exact(inst: &Instance, model: &ObjectiveModel, time_limit: Option<Duration>) -> Result<ExactResult> {
    solve_exact_with(inst, model, &ExactConfig { time_limit, ..Default::default() })
}

pub fn solve_exact_with(inst: &Instance, model: &ObjectiveModel, cfg: &ExactConfig) -> Result<ExactResult> {
    if !model.is_monotone() {
        return Err(Error::InvalidParameter(format!(
            "exact solver needs a monotone objective, {} with these weights is not",
            model.kind
        )));
    }
    if model.num_targets() != inst.num_targets() {
        return Err(Error::InvalidParameter("model and instance disagree on the number of targets".into()));
    }
    let deadline = cfg.time_limit.map(|d| Instant::now() + d);
    let (mut fw, mut bw) = rayon::join(
        || Sweep::run(inst, Direction::Forward, cfg.dominance, deadline),
        || Sweep::run(inst, Direction::Backward, cfg.dominance, deadline),
    );
    let mut joiner = Joiner { inst, model, memo: HashMap::new(), state: model.state(), stats: DpStats::default() };
    joiner.stats.forward_labels = fw.labels.len();
    joiner.stats.backward_labels = bw.labels.len();
    let complete = !fw.timed_out && !bw.timed_out;
    let (best, join_complete) = joiner.join(&mut fw, &mut bw, deadline, cfg.tie_break_pairs);

    let (solution, objective) = match best {
        Some(c) => (c.solution, c.value),
        None => {
            let sol = Solution::empty(inst);
            let v = model.evaluate(&sol.sampled_mask(inst.num_targets()));
            (sol, v)
        }
    };
    debug_assert!(inst.check_solution(&solution).is_ok());
    Ok(ExactResult { solution, objective, optimal: complete && join_complete, stats: joiner.stats })
}

struct Sweep<'a> {
    inst: &'a Instance,
    dir: Direction,
    mode: DominanceMode,
    m_fw: usize,
    m_bw: usize,
    labels: Vec<Label>,
    dead: Vec<bool>,
    heap: BinaryHeap<Reverse<(usize, OrdF64, usize)>>,
    same_set: HashMap<(Node, usize, VisitSet), usize>,
    same_time: HashMap<(Node, usize, u64), Vec<usize>>,
    by_node: HashMap<Node, Vec<usize>>,
    timed_out: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl<'a> Sweep<'a> {
    fn run(inst: &'a Instance, dir: Direction, mode: DominanceMode, deadline: Option<Instant>) -> Self {
        let nv = inst.num_vehicles();
        let (m_fw, m_bw) = extension_limits(nv);
        let mut sweep = Sweep {
            inst,
            dir,
            mode,
            m_fw,
            m_bw,
            labels: Vec::new(),
            dead: Vec::new(),
            heap: BinaryHeap::new(),
            same_set: HashMap::new(),
            same_time: HashMap::new(),
            by_node: HashMap::new(),
            timed_out: false,
        };
        let root = match dir {
            Direction::Forward => Label {
                visited: VisitSet::new(inst.num_targets()),
                vehicle: 0,
                elapsed: 0.0,
                at: inst.start_of(0),
                parent: None,
                completed: 0.0,
            },
            Direction::Backward => Label {
                visited: VisitSet::new(inst.num_targets()),
                vehicle: nv - 1,
                elapsed: 0.0,
                at: inst.end_of(nv - 1),
                parent: None,
                completed: 0.0,
            },
        };
        sweep.insert(root);
        let mut popped = 0usize;
        while let Some(Reverse((_, _, idx))) = sweep.heap.pop() {
            if sweep.dead[idx] {
                continue;
            }
            popped += 1;
            if popped % 1024 == 0 && deadline.is_some_and(|d| Instant::now() > d) {
                sweep.timed_out = true;
                break;
            }
            sweep.expand(idx);
        }
        sweep
    }

    /// Processing order: vehicle-major (away from the root), then elapsed time.
    fn rank(&self, m: usize) -> usize {
        match self.dir {
            Direction::Forward => m,
            Direction::Backward => self.inst.num_vehicles() - 1 - m,
        }
    }

    fn cap(&self, m: usize) -> f64 {
        let t_max = self.inst.vehicles[m].t_max;
        if self.m_fw == self.m_bw && m == self.m_fw {
            0.5 * t_max
        } else {
            t_max
        }
    }

    fn expand(&mut self, idx: usize) {
        let inst = self.inst;
        let (m, elapsed, at) = (self.labels[idx].vehicle, self.labels[idx].elapsed, self.labels[idx].at);
        let t_max = inst.vehicles[m].t_max;
        let cap = self.cap(m);
        let mut extended = false;
        for j in 0..inst.num_targets() {
            if self.labels[idx].visited.contains(j) {
                continue;
            }
            let tj = Node::Target(j);
            let (t, rest) = match self.dir {
                Direction::Forward => (elapsed + inst.arc_time(at, tj), inst.arc_time(tj, inst.end_of(m))),
                Direction::Backward => (elapsed + inst.arc_time(tj, at), inst.arc_time(inst.start_of(m), tj)),
            };
            if t > cap + FEASIBILITY_TOL || t + rest > t_max + FEASIBILITY_TOL {
                continue;
            }
            extended = true;
            let parent = &self.labels[idx];
            let mut visited = parent.visited.clone();
            visited.insert(j);
            let child = Label { visited, vehicle: m, elapsed: t, at: tj, parent: Some(idx), completed: parent.completed };
            self.insert(child);
        }

        // A route is closed only once no target fits any more: any feasible
        // extension yields a superset that can close later.
        let parent = &self.labels[idx];
        let switch = match self.dir {
            _ if extended => None,
            Direction::Forward if m < self.m_fw => Some(Label {
                visited: parent.visited.clone(),
                vehicle: m + 1,
                elapsed: 0.0,
                at: inst.start_of(m + 1),
                parent: Some(idx),
                completed: parent.completed + elapsed + inst.arc_time(at, inst.end_of(m)),
            }),
            Direction::Backward if m > self.m_bw => Some(Label {
                visited: parent.visited.clone(),
                vehicle: m - 1,
                elapsed: 0.0,
                at: inst.end_of(m - 1),
                parent: Some(idx),
                completed: parent.completed + elapsed + inst.arc_time(inst.start_of(m), at),
            }),
            _ => None,
        };
        if let Some(l) = switch {
            self.insert(l);
        }
    }

    fn insert(&mut self, l: Label) {
        let idx = self.labels.len();
        if self.mode == DominanceMode::Full && !self.admit(&l, idx) {
            return;
        }
        self.heap.push(Reverse((self.rank(l.vehicle), OrdF64(l.elapsed), idx)));
        self.labels.push(l);
        self.dead.push(false);
    }

    /// Dominance checks against stored labels; registers `l` under `idx` when
    /// it survives and retires the labels it dominates.
    fn admit(&mut self, l: &Label, idx: usize) -> bool {
        let key = (l.at, l.vehicle, l.visited.clone());
        if let Some(&a) = self.same_set.get(&key) {
            if !self.dead[a] {
                if self.labels[a].elapsed <= l.elapsed {
                    return false;
                }
                self.dead[a] = true;
            }
        }

        let tkey = (l.at, l.vehicle, l.elapsed.to_bits());
        if let Some(bucket) = self.same_time.get_mut(&tkey) {
            bucket.retain(|&a| !self.dead[a]);
            if bucket.iter().any(|&a| self.labels[a].visited.is_superset(&l.visited)) {
                return false;
            }
            for &a in bucket.iter() {
                if l.visited.is_superset(&self.labels[a].visited) {
                    self.dead[a] = true;
                }
            }
        }

        // Across vehicles only at targets: at a depot the dominating label's
        // own vehicle switch would reproduce the label it just retired.
        if self.inst.num_vehicles() > 2 && matches!(l.at, Node::Target(_)) {
            let dir = self.dir;
            if let Some(bucket) = self.by_node.get_mut(&l.at) {
                bucket.retain(|&a| !self.dead[a]);
                for &a in bucket.iter() {
                    let other = &self.labels[a];
                    if other.vehicle != l.vehicle && dominates(other, l, dir) {
                        return false;
                    }
                }
                for &a in bucket.iter() {
                    let other = &self.labels[a];
                    if other.vehicle != l.vehicle && dominates(l, other, dir) {
                        self.dead[a] = true;
                    }
                }
            }
            self.by_node.entry(l.at).or_default().push(idx);
        }

        self.same_set.insert(key, idx);
        self.same_time.entry(tkey).or_default().push(idx);
        true
    }

    /// Live labels on the meeting vehicle, grouped by visited set.
    fn finals(&self, m: usize) -> Vec<Group> {
        let inst = self.inst;
        let shared = self.m_fw == self.m_bw;
        let mut groups: HashMap<VisitSet, Group> = HashMap::new();
        for (idx, l) in self.labels.iter().enumerate() {
            if l.vehicle != m || self.dead[idx] {
                continue;
            }
            let close = match (shared, self.dir) {
                (true, _) => 0.0,
                (false, Direction::Forward) => inst.arc_time(l.at, inst.end_of(m)),
                (false, Direction::Backward) => inst.arc_time(inst.start_of(m), l.at),
            };
            let cost = l.completed + l.elapsed + close;
            let g = groups.entry(l.visited.clone()).or_insert_with(|| Group {
                set: l.visited.clone(),
                members: Vec::new(),
                value: 0.0,
                min_cost: f64::INFINITY,
            });
            g.members.push(idx);
            g.min_cost = g.min_cost.min(cost);
        }
        groups.into_values().collect()
    }

    /// Per-vehicle stops recorded along the parent chain of `idx`.
    fn stops(&self, idx: usize, routes: &mut [Vec<usize>]) {
        let mut chain = Vec::new();
        let mut cur = Some(idx);
        while let Some(k) = cur {
            chain.push(k);
            cur = self.labels[k].parent;
        }
        if self.dir == Direction::Forward {
            chain.reverse();
        }
        for k in chain {
            if let Node::Target(j) = self.labels[k].at {
                routes[self.labels[k].vehicle].push(j);
            }
        }
    }
}

struct Group {
    set: VisitSet,
    members: Vec<usize>,
    value: f64,
    /// Lower bound on this side's share of the total duration.
    min_cost: f64,
}

struct Candidate {
    value: f64,
    cost: f64,
    solution: Solution,
}

struct Joiner<'a> {
    inst: &'a Instance,
    model: &'a ObjectiveModel,
    memo: HashMap<VisitSet, f64>,
    state: ObjectiveState,
    stats: DpStats,
}

impl Joiner<'_> {
    fn value(&mut self, set: &VisitSet) -> f64 {
        self.stats.lookups += 1;
        if let Some(&v) = self.memo.get(set) {
            return v;
        }
        self.stats.evaluations += 1;
        for i in set.iter() {
            self.model.apply(&mut self.state, i);
        }
        let v = self.state.value;
        for i in set.iter() {
            self.model.revert(&mut self.state, i);
        }
        self.memo.insert(set.clone(), v);
        v
    }

    fn sorted_groups(&mut self, mut groups: Vec<Group>) -> Vec<Group> {
        for g in &mut groups {
            g.value = self.value(&g.set);
        }
        groups.sort_by(|a, b| b.value.total_cmp(&a.value).then_with(|| a.set.cmp(&b.set)));
        groups
    }

    /// Cheapest feasible way to glue a forward and a backward group, as
    /// `(total duration, forward label, backward label)`.
    fn glue(&self, fw: &Sweep, bw: &Sweep, f: &Group, b: &Group) -> Option<(f64, usize, usize)> {
        let inst = self.inst;
        let shared = fw.m_fw == fw.m_bw;
        let m_f = fw.m_fw;
        let m_b = fw.m_bw;
        let mut best: Option<(f64, usize, usize)> = None;
        for &fi in &f.members {
            let lf = &fw.labels[fi];
            for &bi in &b.members {
                let lb = &bw.labels[bi];
                let cost = if shared {
                    let t = lf.elapsed + inst.arc_time(lf.at, lb.at) + lb.elapsed;
                    if t > inst.vehicles[m_f].t_max + FEASIBILITY_TOL {
                        continue;
                    }
                    lf.completed + lb.completed + t
                } else {
                    lf.completed
                        + lf.elapsed
                        + inst.arc_time(lf.at, inst.end_of(m_f))
                        + lb.completed
                        + lb.elapsed
                        + inst.arc_time(inst.start_of(m_b), lb.at)
                };
                if best.is_none_or(|(c, _, _)| cost < c) {
                    best = Some((cost, fi, bi));
                }
            }
        }
        best
    }

    /// Routes of a join; a target recorded twice keeps its first visit.
    fn solution(&self, fw: &Sweep, bw: &Sweep, fi: usize, bi: usize) -> Solution {
        let nv = self.inst.num_vehicles();
        let mut fw_stops = vec![Vec::new(); nv];
        fw.stops(fi, &mut fw_stops);
        let mut bw_stops = vec![Vec::new(); nv];
        bw.stops(bi, &mut bw_stops);
        let mut seen = vec![false; self.inst.num_targets()];
        let routes = (0..nv)
            .map(|m| {
                let stops = fw_stops[m]
                    .iter()
                    .chain(&bw_stops[m])
                    .copied()
                    .filter(|&j| !std::mem::replace(&mut seen[j], true))
                    .collect();
                Route::with_stops(m, stops, self.inst)
            })
            .collect();
        Solution { routes }
    }

    /// Gains `gain_i(S_f)` of every target outside `f`, zero inside.
    fn gains(&mut self, f: &Group, out: &mut Vec<f64>) {
        out.clear();
        out.resize(self.model.num_targets(), 0.0);
        for i in f.set.iter() {
            self.model.apply(&mut self.state, i);
        }
        for (i, g) in out.iter_mut().enumerate() {
            if !f.set.contains(i) {
                *g = self.model.gain(&self.state, i);
            }
        }
        for i in f.set.iter() {
            self.model.revert(&mut self.state, i);
        }
    }

    /// Submodularity bound `I(S_f) + Σ_{i∈S_b∖S_f} gain_i(S_f) ≥ I(S_f ∪ S_b)`.
    fn pair_bound(f: &Group, gains: &[f64], b: &Group) -> f64 {
        f.value + b.set.iter().map(|i| gains[i]).sum::<f64>()
    }

    /// Exact value and cheapest duration of a pair, `None` when infeasible.
    fn evaluate_pair(&mut self, fw: &Sweep, bw: &Sweep, f: &Group, b: &Group) -> Option<(f64, f64, usize, usize)> {
        let value = self.value(&f.set.union(&b.set));
        let (mut cost, fi, bi) = self.glue(fw, bw, f, b)?;
        if !f.set.is_disjoint(&b.set) {
            cost = self.solution(fw, bw, fi, bi).total_duration();
        }
        Some((value, cost, fi, bi))
    }

    /// Two passes: the best informativeness first, scanning pairs by
    /// decreasing value bound; then the cheapest pair reaching it, scanning by
    /// increasing duration bound. Splitting them keeps the many equally
    /// informative pairs of saturated coverage out of the first pass.
    fn join(
        &mut self,
        fw: &mut Sweep,
        bw: &mut Sweep,
        deadline: Option<Instant>,
        tie_break_pairs: Option<usize>,
    ) -> (Option<Candidate>, bool) {
        let fgroups = fw.finals(fw.m_fw);
        let fgroups = self.sorted_groups(fgroups);
        let bgroups = bw.finals(bw.m_bw);
        let bgroups = self.sorted_groups(bgroups);
        let (Some(b_top), false) = (bgroups.first().map(|g| g.value), fgroups.is_empty()) else {
            return (None, false);
        };

        let mut pairs = 0usize;
        let timed_out = |pairs: &mut usize| {
            *pairs += 1;
            *pairs % 65536 == 0 && deadline.is_some_and(|d| Instant::now() > d)
        };
        let mut gains = Vec::new();
        let mut best: Option<Candidate> = None;
        let mut complete = true;

        // Nothing beats sampling every target some vehicle can reach.
        let unreachable: Vec<bool> = {
            let mut mask = vec![true; self.inst.num_targets()];
            for m in 0..self.inst.num_vehicles() {
                for i in self.inst.reachable_targets(m) {
                    mask[i] = false;
                }
            }
            mask
        };
        let ceiling = self.model.upper_bound(&unreachable) - VALUE_TOL;

        'value: for f in &fgroups {
            let floor = best.as_ref().map_or(f64::NEG_INFINITY, |c| c.value + VALUE_TOL);
            if f.value + b_top <= floor || floor > ceiling {
                break;
            }
            self.gains(f, &mut gains);
            for b in &bgroups {
                let floor = best.as_ref().map_or(f64::NEG_INFINITY, |c| c.value + VALUE_TOL);
                if f.value + b.value <= floor {
                    break;
                }
                if floor > ceiling {
                    break 'value;
                }
                if timed_out(&mut pairs) {
                    complete = false;
                    break 'value;
                }
                if Self::pair_bound(f, &gains, b) <= floor {
                    continue;
                }
                if let Some((value, cost, fi, bi)) = self.evaluate_pair(fw, bw, f, b) {
                    if value > floor {
                        best = Some(Candidate { value, cost, solution: self.solution(fw, bw, fi, bi) });
                    }
                }
            }
        }

        self.stats.join_pairs = pairs;
        if let (Some(mut incumbent), true) = (best.take(), complete) {
            let budget = tie_break_pairs.map_or(usize::MAX, |b| pairs.saturating_add(b));
            let target = incumbent.value - VALUE_TOL;
            let by_cost = |groups: &[Group]| {
                let mut order: Vec<usize> = (0..groups.len()).collect();
                order.sort_by(|&x, &y| groups[x].min_cost.total_cmp(&groups[y].min_cost));
                order
            };
            let (f_order, b_order) = (by_cost(&fgroups), by_cost(&bgroups));
            let b_cheapest = bgroups[b_order[0]].min_cost;
            'cost: for &fi in &f_order {
                let f = &fgroups[fi];
                if f.min_cost + b_cheapest > incumbent.cost + VALUE_TOL {
                    break;
                }
                if f.value + b_top < target {
                    continue;
                }
                let mut have_gains = false;
                for &bj in &b_order {
                    let b = &bgroups[bj];
                    if f.min_cost + b.min_cost > incumbent.cost + VALUE_TOL {
                        break;
                    }
                    if timed_out(&mut pairs) {
                        complete = false;
                        break 'cost;
                    }
                    if pairs > budget {
                        break 'cost;
                    }
                    if f.value + b.value < target {
                        continue;
                    }
                    if !have_gains {
                        self.gains(f, &mut gains);
                        have_gains = true;
                    }
                    if Self::pair_bound(f, &gains, b) < target {
                        continue;
                    }
                    let Some((value, cost, li, lj)) = self.evaluate_pair(fw, bw, f, b) else {
                        continue;
                    };
                    if value < target || cost > incumbent.cost + VALUE_TOL {
                        continue;
                    }
                    let solution = self.solution(fw, bw, li, lj);
                    let key = |s: &Solution| s.routes.iter().map(|r| r.stops.clone()).collect::<Vec<_>>();
                    if cost < incumbent.cost - VALUE_TOL || key(&solution) < key(&incumbent.solution) {
                        incumbent = Candidate { value: incumbent.value.max(value), cost, solution };
                    }
                }
            }
            best = Some(incumbent);
        }
        self.stats.tie_break_pairs = pairs - self.stats.join_pairs;
        (best, complete)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(set: &[usize], m: usize, t: f64) -> Label {
        let mut visited = VisitSet::new(8);
        for &i in set {
            visited.insert(i);
        }
        Label { visited, vehicle: m, elapsed: t, at: Node::Target(7), parent: None, completed: 0.0 }
    }

    #[test]
    fn bitset_operations() {
        let mut a = VisitSet::new(130);
        a.insert(3);
        a.insert(64);
        a.insert(129);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![3, 64, 129]);
        assert_eq!(a.len(), 3);
        let mut b = VisitSet::new(130);
        b.insert(64);
        assert!(a.is_superset(&b) && !b.is_superset(&a));
        assert!(!a.is_disjoint(&b));
        let mut c = VisitSet::new(130);
        c.insert(5);
        assert!(a.is_disjoint(&c));
        assert_eq!(a.union(&c).len(), 4);
    }

    #[test]
    fn dominance_rules() {
        let fw = Direction::Forward;
        assert!(dominates(&label(&[0, 1], 0, 10.0), &label(&[0], 0, 10.0), fw));
        assert!(!dominates(&label(&[0], 0, 9.0), &label(&[1], 0, 9.0), fw));
        assert!(!dominates(&label(&[1], 0, 9.0), &label(&[0], 0, 9.0), fw));
        assert!(dominates(&label(&[0], 0, 8.0), &label(&[0], 0, 9.0), fw));
        assert!(!dominates(&label(&[0], 0, 8.0), &label(&[0, 1], 0, 9.0), fw));
        // Earlier vehicle with a superset wins regardless of time.
        assert!(dominates(&label(&[0, 1], 0, 50.0), &label(&[0], 1, 1.0), fw));
        assert!(!dominates(&label(&[0, 1], 0, 50.0), &label(&[0], 1, 1.0), Direction::Backward));
        assert!(dominates(&label(&[0, 1], 1, 50.0), &label(&[0], 0, 1.0), Direction::Backward));
    }

    #[test]
    fn no_label_strictly_dominates_itself_unless_equal_time_rule() {
        // Equal time and equal set: the rule treats it as a duplicate.
        let a = label(&[2], 0, 4.0);
        assert!(dominates(&a, &a, Direction::Forward));
        let b = label(&[2], 0, 5.0);
        assert!(dominates(&a, &b, Direction::Forward) && !dominates(&b, &a, Direction::Forward));
    }

    #[test]
    fn extension_limit_formula() {
        assert_eq!(extension_limits(1), (0, 0));
        assert_eq!(extension_limits(2), (0, 1));
        assert_eq!(extension_limits(3), (1, 1));
        assert_eq!(extension_limits(4), (1, 2));
    }
}
