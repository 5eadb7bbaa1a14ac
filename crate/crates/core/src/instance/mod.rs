//! Problem data model: target grid, fleet, travel-time model and the
//! feasibility predicates every solver relies on.
//!
//! Targets are addressed by their dense index `0..n`; the external `id` of a
//! [`Location`] is only used for file formats. Depots live in a separate list
//! and are never sensed.

mod chao;
mod json;

pub use chao::parse_chao;
pub use json::{InstanceFile, SolutionFile};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack used by every duration feasibility check.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

impl Location {
    pub fn new(id: usize, x: f64, y: f64) -> Self {
        Self { id, x, y }
    }

    pub fn distance(&self, other: &Location) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: usize,
    /// Index into [`Instance::depots`].
    pub start: usize,
    /// Index into [`Instance::depots`].
    pub end: usize,
    pub t_max: f64,
}

/// How flight time depends on distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MotionModel {
    /// Stop-and-go flight with a constant horizontal acceleration `a` up to
    /// the cruise speed `v_max`.
    Accelerated { v_max: f64, a: f64 },
    /// Constant speed, no acceleration phase. Classical TOP benchmarks use
    /// `speed = 1` so that travel time equals Euclidean distance.
    Constant { speed: f64 },
}

impl MotionModel {
    pub fn uav(v_max: f64, a: f64) -> Self {
        MotionModel::Accelerated { v_max, a }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            MotionModel::Accelerated { v_max, a } => v_max > 0.0 && a > 0.0,
            MotionModel::Constant { speed } => speed > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInstance(format!("non-positive motion parameters in {self:?}")))
        }
    }
}

/// Flight time for a straight leg of length `d` meters.
///
/// Short legs never reach cruise speed and take `2·sqrt(d/a)`; longer legs
/// spend `v_max/a` accelerating plus decelerating and cruise for the rest.
pub fn travel_time(d: f64, motion: &MotionModel) -> f64 {
    debug_assert!(d >= 0.0, "negative distance {d}");
    match *motion {
        MotionModel::Accelerated { v_max, a } => {
            if d < v_max * v_max / a {
                2.0 * (d / a).sqrt()
            } else {
                d / v_max + v_max / a
            }
        }
        MotionModel::Constant { speed } => d / speed,
    }
}

/// A point a vehicle can fly to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Target(usize),
    Depot(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub vehicle: usize,
    pub stops: Vec<usize>,
    pub duration: f64,
}

impl Route {
    pub fn empty(vehicle: usize, inst: &Instance) -> Self {
        let mut r = Route { vehicle, stops: Vec::new(), duration: 0.0 };
        r.duration = inst.route_duration(vehicle, &r.stops);
        r
    }

    pub fn with_stops(vehicle: usize, stops: Vec<usize>, inst: &Instance) -> Self {
        let duration = inst.route_duration(vehicle, &stops);
        Route { vehicle, stops, duration }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub routes: Vec<Route>,
}

impl Solution {
    /// All vehicles fly directly from start to end.
    pub fn empty(inst: &Instance) -> Self {
        Solution { routes: (0..inst.num_vehicles()).map(|m| Route::empty(m, inst)).collect() }
    }

    /// The set S of sampled targets as a membership mask.
    pub fn sampled_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for r in &self.routes {
            for &i in &r.stops {
                mask[i] = true;
            }
        }
        mask
    }

    /// Sampled targets in ascending order.
    pub fn sampled(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.routes.iter().flat_map(|r| r.stops.iter().copied()).collect();
        s.sort_unstable();
        s
    }

    pub fn total_duration(&self) -> f64 {
        self.routes.iter().map(|r| r.duration).sum()
    }

    pub fn num_sampled(&self) -> usize {
        self.routes.iter().map(|r| r.stops.len()).sum()
    }
}

/// The immutable problem statement.
///
/// Pairwise distances and arc times between targets are precomputed; the
/// matrices are `n²` which is fine up to a few thousand targets.
#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub targets: Vec<Location>,
    pub priorities: Vec<f64>,
    pub depots: Vec<Location>,
    pub vehicles: Vec<Vehicle>,
    pub motion: MotionModel,
    pub sensing_time: f64,
    dist: Vec<f64>,
    arc: Vec<f64>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        targets: Vec<Location>,
        priorities: Vec<f64>,
        depots: Vec<Location>,
        vehicles: Vec<Vehicle>,
        motion: MotionModel,
        sensing_time: f64,
    ) -> Result<Self> {
        if priorities.len() != targets.len() {
            return Err(Error::InvalidInstance(format!(
                "{} priorities for {} targets",
                priorities.len(),
                targets.len()
            )));
        }
        if let Some(u) = priorities.iter().find(|u| !(u.is_finite() && **u >= 0.0)) {
            return Err(Error::InvalidInstance(format!("priority {u} is not a nonnegative number")));
        }
        for l in targets.iter().chain(depots.iter()) {
            if !(l.x.is_finite() && l.y.is_finite()) {
                return Err(Error::InvalidInstance(format!("location {} has non-finite coordinates", l.id)));
            }
        }
        let mut ids: Vec<usize> = targets.iter().map(|l| l.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstance("duplicate target id".into()));
        }
        if !(sensing_time.is_finite() && sensing_time >= 0.0) {
            return Err(Error::InvalidInstance(format!("sensing time {sensing_time}")));
        }
        motion.validate()?;
        if vehicles.is_empty() {
            return Err(Error::InvalidInstance("no vehicles".into()));
        }
        for v in &vehicles {
            if v.start >= depots.len() || v.end >= depots.len() {
                return Err(Error::UnknownLocation(format!("depot of vehicle {}", v.id)));
            }
            if v.t_max.is_nan() || v.t_max < 0.0 {
                return Err(Error::InvalidInstance(format!("vehicle {} has t_max {}", v.id, v.t_max)));
            }
        }

        let n = targets.len();
        let mut dist = vec![0.0; n * n];
        let mut arc = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = targets[i].distance(&targets[j]);
                dist[i * n + j] = d;
                arc[i * n + j] = travel_time(d, &motion) + sensing_time;
            }
        }
        Ok(Instance {
            name: name.into(),
            targets,
            priorities,
            depots,
            vehicles,
            motion,
            sensing_time,
            dist,
            arc,
        })
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn num_vehicles(&self) -> usize {
        self.vehicles.len()
    }

    pub fn total_priority(&self) -> f64 {
        self.priorities.iter().sum()
    }

    pub fn location(&self, node: Node) -> &Location {
        match node {
            Node::Target(i) => &self.targets[i],
            Node::Depot(d) => &self.depots[d],
        }
    }

    pub fn start_of(&self, m: usize) -> Node {
        Node::Depot(self.vehicles[m].start)
    }

    pub fn end_of(&self, m: usize) -> Node {
        Node::Depot(self.vehicles[m].end)
    }

    /// Euclidean distance between two targets.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.targets.len() + j]
    }

    pub fn node_dist(&self, a: Node, b: Node) -> f64 {
        match (a, b) {
            (Node::Target(i), Node::Target(j)) => self.dist(i, j),
            _ => self.location(a).distance(self.location(b)),
        }
    }

    /// Flight time from `from` to `to`, plus the sensing time when `to` is a
    /// target. Depots are never sensed.
    #[inline]
    pub fn arc_time(&self, from: Node, to: Node) -> f64 {
        match (from, to) {
            (Node::Target(i), Node::Target(j)) => self.arc[i * self.targets.len() + j],
            (_, Node::Target(_)) => travel_time(self.node_dist(from, to), &self.motion) + self.sensing_time,
            (_, Node::Depot(_)) => {
                if from == to {
                    0.0
                } else {
                    travel_time(self.node_dist(from, to), &self.motion)
                }
            }
        }
    }

    /// Checked variant of [`arc_time`](Self::arc_time) for externally supplied ids.
    pub fn try_arc_time(&self, from: Node, to: Node) -> Result<f64> {
        for node in [from, to] {
            let ok = match node {
                Node::Target(i) => i < self.targets.len(),
                Node::Depot(d) => d < self.depots.len(),
            };
            if !ok {
                return Err(Error::UnknownLocation(format!("{node:?}")));
            }
        }
        Ok(self.arc_time(from, to))
    }

    /// Total flight time of vehicle `m` visiting `stops` in order.
    pub fn route_duration(&self, m: usize, stops: &[usize]) -> f64 {
        let start = self.start_of(m);
        let end = self.end_of(m);
        let Some((&first, rest)) = stops.split_first() else {
            return self.arc_time(start, end);
        };
        let mut t = self.arc_time(start, Node::Target(first));
        let mut prev = first;
        for &i in rest {
            t += self.arc_time(Node::Target(prev), Node::Target(i));
            prev = i;
        }
        t + self.arc_time(Node::Target(prev), end)
    }

    /// Targets vehicle `m` can visit on a single-stop tour.
    pub fn reachable_targets(&self, m: usize) -> Vec<usize> {
        let v = &self.vehicles[m];
        let (s, e) = (self.start_of(m), self.end_of(m));
        (0..self.num_targets())
            .filter(|&i| {
                self.arc_time(s, Node::Target(i)) + self.arc_time(Node::Target(i), e) <= v.t_max + FEASIBILITY_TOL
            })
            .collect()
    }

    /// Extra flight time of inserting target `i` between `prev` and `next`.
    #[inline]
    pub fn detour(&self, prev: Node, i: usize, next: Node) -> f64 {
        let t = Node::Target(i);
        self.arc_time(prev, t) + self.arc_time(t, next) - self.arc_time(prev, next)
    }

    /// Route nodes including both depots.
    pub fn route_nodes(&self, route: &Route) -> Vec<Node> {
        let mut nodes = Vec::with_capacity(route.stops.len() + 2);
        nodes.push(self.start_of(route.vehicle));
        nodes.extend(route.stops.iter().map(|&i| Node::Target(i)));
        nodes.push(self.end_of(route.vehicle));
        nodes
    }

    /// Checks every invariant of a solution: one route per vehicle, distinct
    /// stops across routes, cached durations up to date and within budget.
    pub fn check_solution(&self, sol: &Solution) -> Result<()> {
        if sol.routes.len() != self.num_vehicles() {
            return Err(Error::Infeasible(format!(
                "{} routes for {} vehicles",
                sol.routes.len(),
                self.num_vehicles()
            )));
        }
        let mut seen = vec![false; self.num_targets()];
        for (m, r) in sol.routes.iter().enumerate() {
            if r.vehicle != m {
                return Err(Error::Infeasible(format!("route {m} belongs to vehicle {}", r.vehicle)));
            }
            for &i in &r.stops {
                if i >= seen.len() {
                    return Err(Error::UnknownLocation(format!("target index {i}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Infeasible(format!("target {i} visited twice")));
                }
            }
            let fresh = self.route_duration(m, &r.stops);
            if (fresh - r.duration).abs() > 1e-6 {
                return Err(Error::Infeasible(format!(
                    "route {m} caches duration {} but recomputes to {fresh}",
                    r.duration
                )));
            }
            if fresh > self.vehicles[m].t_max + FEASIBILITY_TOL {
                return Err(Error::Infeasible(format!(
                    "route {m} takes {fresh} s, budget {}",
                    self.vehicles[m].t_max
                )));
            }
        }
        Ok(())
    }

    /// Index of the target with external id `id`.
    pub fn target_index(&self, id: usize) -> Option<usize> {
        self.targets.iter().position(|l| l.id == id)
    }

    /// Median distance to the nearest other target; the grid spacing for
    /// grid instances.
    pub fn typical_spacing(&self) -> f64 {
        let n = self.num_targets();
        if n < 2 {
            return 1.0;
        }
        let mut nn: Vec<f64> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).map(|j| self.dist(i, j)).fold(f64::INFINITY, f64::min))
            .collect();
        nn.sort_by(f64::total_cmp);
        let s = nn[n / 2];
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// Replaces the priority vector, keeping geometry and fleet.
    pub fn with_priorities(&self, priorities: Vec<f64>) -> Result<Self> {
        Instance::new(
            self.name.clone(),
            self.targets.clone(),
            priorities,
            self.depots.clone(),
            self.vehicles.clone(),
            self.motion,
            self.sensing_time,
        )
    }

    /// Sub-instance restricted to `keep` (in the given order) with new
    /// priorities; returns the instance and the back-mapping to parent indices.
    pub fn restrict(&self, keep: &[usize], priorities: Vec<f64>) -> Result<Self> {
        let targets = keep.iter().map(|&i| self.targets[i]).collect();
        Instance::new(
            self.name.clone(),
            targets,
            priorities,
            self.depots.clone(),
            self.vehicles.clone(),
            self.motion,
            self.sensing_time,
        )
    }

    /// Same instance with only vehicle `m` (renumbered to 0).
    pub fn single_vehicle(&self, m: usize, keep: &[usize]) -> Result<Self> {
        let targets = keep.iter().map(|&i| self.targets[i]).collect();
        let priorities = keep.iter().map(|&i| self.priorities[i]).collect();
        let mut v = self.vehicles[m];
        v.id = 0;
        Instance::new(
            self.name.clone(),
            targets,
            priorities,
            self.depots.clone(),
            vec![v],
            self.motion,
            self.sensing_time,
        )
    }
}

/// Regular lattice layout of the targets, when there is one.
#[derive(Clone, Debug, PartialEq)]
pub struct GridLayout {
    pub x0: f64,
    pub y0: f64,
    pub spacing: f64,
    pub cols: usize,
    pub rows: usize,
    /// `(col, row)` of every target.
    pub cells: Vec<(usize, usize)>,
}

impl Instance {
    /// Detects whether all targets sit on an axis-aligned lattice with a
    /// common spacing.
    pub fn grid_layout(&self) -> Option<GridLayout> {
        if self.num_targets() < 2 {
            return None;
        }
        let spacing = self.typical_spacing();
        let x0 = self.targets.iter().map(|l| l.x).fold(f64::INFINITY, f64::min);
        let y0 = self.targets.iter().map(|l| l.y).fold(f64::INFINITY, f64::min);
        let tol = 1e-6 * spacing;
        let mut cells = Vec::with_capacity(self.num_targets());
        for l in &self.targets {
            let cx = (l.x - x0) / spacing;
            let cy = (l.y - y0) / spacing;
            if (cx - cx.round()).abs() * spacing > tol || (cy - cy.round()).abs() * spacing > tol {
                return None;
            }
            cells.push((cx.round() as usize, cy.round() as usize));
        }
        let cols = cells.iter().map(|c| c.0).max()? + 1;
        let rows = cells.iter().map(|c| c.1).max()? + 1;
        Some(GridLayout { x0, y0, spacing, cols, rows, cells })
    }
}
