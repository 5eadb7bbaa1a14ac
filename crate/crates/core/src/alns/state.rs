use crate::instance::{Instance, Node, Route, Solution, FEASIBILITY_TOL};
use crate::objective::{ObjectiveModel, ObjectiveState};

/// Where a target currently sits in the destroy/repair cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// On route `m`.
    Planned(usize),
    Unvisited,
    Open,
}

/// Per-problem data shared by all iterations.
pub struct Context<'a> {
    pub inst: &'a Instance,
    pub model: &'a ObjectiveModel,
    pub spacing: f64,
    /// Neighbors within `max_radius`, sorted by distance.
    neighbors: Vec<Vec<(usize, f64)>>,
    max_radius: f64,
}

impl<'a> Context<'a> {
    pub fn new(inst: &'a Instance, model: &'a ObjectiveModel) -> Self {
        let spacing = inst.typical_spacing();
        let (lo, hi) = d_limit_range(model, spacing);
        let max_radius = hi.max(lo);
        let n = inst.num_targets();
        let neighbors = (0..n)
            .map(|i| {
                let mut v: Vec<(usize, f64)> =
                    (0..n).map(|j| (j, inst.dist(i, j))).filter(|&(_, d)| d < max_radius).collect();
                v.sort_by(|a, b| a.1.total_cmp(&b.1));
                v
            })
            .collect();
        Context { inst, model, spacing, neighbors, max_radius }
    }

    /// Targets strictly closer than `d` to `i` (including `i`); `d` is capped
    /// at the precomputed radius.
    pub fn within(&self, i: usize, d: f64) -> impl Iterator<Item = usize> + '_ {
        let d = d.min(self.max_radius);
        self.neighbors[i].iter().take_while(move |p| p.1 < d).map(|p| p.0)
    }

    pub fn d_limit_range(&self) -> (f64, f64) {
        d_limit_range(self.model, self.spacing)
    }
}

/// Range of the randomized region radius: from two grid spacings to the
/// coverage radius (four spacings when the model has no neighborhoods).
pub fn d_limit_range(model: &ObjectiveModel, spacing: f64) -> (f64, f64) {
    let lo = 2.0 * spacing;
    let r = model.weights().radius;
    let hi = if r > 0.0 { r } else { 4.0 * spacing };
    (lo, hi.max(lo))
}

/// A (partial) solution during the search: routes, statuses and the
/// incremental objective cache.
#[derive(Clone, Debug)]
pub struct SearchState {
    pub routes: Vec<Vec<usize>>,
    pub durations: Vec<f64>,
    pub status: Vec<Status>,
    pub obj: ObjectiveState,
}

/// One feasible insertion slot: extra duration and position in the route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slot {
    pub route: usize,
    pub pos: usize,
    pub detour: f64,
}

impl SearchState {
    pub fn empty(ctx: &Context) -> Self {
        let inst = ctx.inst;
        let nv = inst.num_vehicles();
        SearchState {
            routes: vec![Vec::new(); nv],
            durations: (0..nv).map(|m| inst.route_duration(m, &[])).collect(),
            status: vec![Status::Unvisited; inst.num_targets()],
            obj: ctx.model.state(),
        }
    }

    pub fn from_solution(ctx: &Context, sol: &Solution) -> Self {
        let mut st = Self::empty(ctx);
        for r in &sol.routes {
            for &i in &r.stops {
                st.status[i] = Status::Planned(r.vehicle);
                ctx.model.apply(&mut st.obj, i);
            }
            st.routes[r.vehicle] = r.stops.clone();
            st.durations[r.vehicle] = ctx.inst.route_duration(r.vehicle, &r.stops);
        }
        st
    }

    pub fn to_solution(&self, inst: &Instance) -> Solution {
        Solution {
            routes: self.routes.iter().enumerate().map(|(m, s)| Route::with_stops(m, s.clone(), inst)).collect(),
        }
    }

    pub fn weighted_value(&self, ctx: &Context) -> f64 {
        self.obj.value - ctx.model.rho * self.durations.iter().sum::<f64>()
    }

    pub fn total_duration(&self) -> f64 {
        self.durations.iter().sum()
    }

    pub fn num_planned(&self) -> usize {
        self.routes.iter().map(Vec::len).sum()
    }

    pub fn planned(&self) -> Vec<usize> {
        self.routes.iter().flatten().copied().collect()
    }

    pub fn with_status(&self, s: Status) -> Vec<usize> {
        (0..self.status.len()).filter(|&i| self.status[i] == s).collect()
    }

    pub fn open(&self) -> Vec<usize> {
        self.with_status(Status::Open)
    }

    pub fn unvisited(&self) -> Vec<usize> {
        self.with_status(Status::Unvisited)
    }

    /// Node at position `p` of route `m`, counting the start depot as 0.
    #[inline]
    pub fn node(&self, inst: &Instance, m: usize, p: usize) -> Node {
        let r = &self.routes[m];
        if p == 0 {
            inst.start_of(m)
        } else if p <= r.len() {
            Node::Target(r[p - 1])
        } else {
            inst.end_of(m)
        }
    }

    /// Duration saved by dropping the stop at index `k` of route `m`.
    pub fn removal_saving(&self, inst: &Instance, m: usize, k: usize) -> f64 {
        let i = self.routes[m][k];
        inst.detour(self.node(inst, m, k), i, self.node(inst, m, k + 2))
    }

    /// Takes a planned target off its route and marks it open.
    pub fn unplan(&mut self, ctx: &Context, i: usize) {
        let Status::Planned(m) = self.status[i] else {
            panic!("target {i} is not planned");
        };
        let k = self.routes[m].iter().position(|&x| x == i).expect("status and route agree");
        self.routes[m].remove(k);
        self.durations[m] = ctx.inst.route_duration(m, &self.routes[m]);
        ctx.model.revert(&mut self.obj, i);
        self.status[i] = Status::Open;
    }

    pub fn insert(&mut self, ctx: &Context, i: usize, slot: Slot) {
        debug_assert!(self.status[i] != Status::Planned(slot.route));
        self.routes[slot.route].insert(slot.pos, i);
        self.durations[slot.route] = ctx.inst.route_duration(slot.route, &self.routes[slot.route]);
        ctx.model.apply(&mut self.obj, i);
        self.status[i] = Status::Planned(slot.route);
    }

    /// The `k` cheapest feasible slots of `i` in route `m`, ascending.
    pub fn best_slots(&self, inst: &Instance, i: usize, m: usize, k: usize) -> Vec<Slot> {
        let free = inst.vehicles[m].t_max - self.durations[m] + FEASIBILITY_TOL;
        let mut out: Vec<Slot> = Vec::with_capacity(k + 1);
        if free < 0.0 || k == 0 {
            return out;
        }
        let len = self.routes[m].len();
        let mut prev = inst.start_of(m);
        for pos in 0..=len {
            let next = self.node(inst, m, pos + 1);
            let d = inst.detour(prev, i, next);
            if d <= free && (out.len() < k || d < out[k - 1].detour) {
                let at = out.partition_point(|s| s.detour <= d);
                out.insert(at, Slot { route: m, pos, detour: d });
                out.truncate(k);
            }
            prev = next;
        }
        out
    }

    /// Cheapest feasible slot of `i` over all routes.
    pub fn best_slot(&self, inst: &Instance, i: usize) -> Option<Slot> {
        (0..self.routes.len())
            .filter_map(|m| self.best_slots(inst, i, m, 1).first().copied())
            .min_by(|a, b| a.detour.total_cmp(&b.detour))
    }

    /// Consistency of statuses, routes, durations and the objective cache.
    pub fn check(&self, ctx: &Context) -> Result<(), String> {
        let inst = ctx.inst;
        let mut seen = vec![false; self.status.len()];
        for (m, r) in self.routes.iter().enumerate() {
            for &i in r {
                if std::mem::replace(&mut seen[i], true) {
                    return Err(format!("target {i} appears twice"));
                }
                if self.status[i] != Status::Planned(m) {
                    return Err(format!("target {i} on route {m} has status {:?}", self.status[i]));
                }
            }
            let d = inst.route_duration(m, r);
            if (d - self.durations[m]).abs() > 1e-6 || d > inst.vehicles[m].t_max + FEASIBILITY_TOL {
                return Err(format!("route {m}: duration {d} (cached {}), budget {}", self.durations[m], inst.vehicles[m].t_max));
            }
        }
        for (i, s) in self.status.iter().enumerate() {
            if matches!(s, Status::Planned(_)) != seen[i] {
                return Err(format!("target {i} has status {s:?}"));
            }
        }
        let fresh = ctx.model.evaluate(&seen);
        if (fresh - self.obj.value).abs() > 1e-6 * fresh.abs().max(1.0) {
            return Err(format!("cached objective {} vs {fresh}", self.obj.value));
        }
        Ok(())
    }
}
