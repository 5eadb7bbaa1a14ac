//! JSON exchange formats for instances and solutions.

use serde::{Deserialize, Serialize};

use super::{Instance, Location, MotionModel, Route, Solution, Vehicle};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TargetRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub priority: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VehicleRecord {
    pub id: usize,
    pub start: Point,
    pub end: Point,
    pub t_max: f64,
}

/// On-disk instance document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub targets: Vec<TargetRecord>,
    pub vehicles: Vec<VehicleRecord>,
    pub motion: MotionModel,
    pub sensing_time: f64,
    /// Simulated contaminant values, one per target in file order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_field: Option<Vec<f64>>,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance, true_field: Option<Vec<f64>>) -> Self {
        let targets = inst
            .targets
            .iter()
            .zip(&inst.priorities)
            .map(|(l, &priority)| TargetRecord { id: l.id, x: l.x, y: l.y, priority })
            .collect();
        let point = |d: usize| Point { x: inst.depots[d].x, y: inst.depots[d].y };
        let vehicles = inst
            .vehicles
            .iter()
            .map(|v| VehicleRecord { id: v.id, start: point(v.start), end: point(v.end), t_max: v.t_max })
            .collect();
        InstanceFile {
            name: inst.name.clone(),
            targets,
            vehicles,
            motion: inst.motion,
            sensing_time: inst.sensing_time,
            true_field,
        }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let targets: Vec<Location> = self.targets.iter().map(|t| Location::new(t.id, t.x, t.y)).collect();
        let priorities = self.targets.iter().map(|t| t.priority).collect();
        let mut depots: Vec<Location> = Vec::new();
        let mut depot_of = |p: Point| -> usize {
            if let Some(k) = depots.iter().position(|d| d.x == p.x && d.y == p.y) {
                return k;
            }
            depots.push(Location::new(depots.len(), p.x, p.y));
            depots.len() - 1
        };
        let vehicles: Vec<Vehicle> = self
            .vehicles
            .iter()
            .map(|v| Vehicle { id: v.id, start: depot_of(v.start), end: depot_of(v.end), t_max: v.t_max })
            .collect();
        if let Some(f) = &self.true_field {
            if f.len() != targets.len() {
                return Err(Error::InvalidInstance(format!(
                    "true_field has {} values for {} targets",
                    f.len(),
                    targets.len()
                )));
            }
        }
        Instance::new(self.name.clone(), targets, priorities, depots, vehicles, self.motion, self.sensing_time)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RouteRecord {
    pub vehicle: usize,
    /// External target ids in visiting order.
    pub stops: Vec<usize>,
    pub duration: f64,
}

/// On-disk solution document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionFile {
    #[serde(default)]
    pub instance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub routes: Vec<RouteRecord>,
    pub objective: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Solver wall time of the run that produced the routes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl SolutionFile {
    pub fn from_solution(inst: &Instance, sol: &Solution, objective: f64) -> Self {
        let routes = sol
            .routes
            .iter()
            .map(|r| RouteRecord {
                vehicle: inst.vehicles[r.vehicle].id,
                stops: r.stops.iter().map(|&i| inst.targets[i].id).collect(),
                duration: r.duration,
            })
            .collect();
        SolutionFile { instance: inst.name.clone(), model: None, routes, objective, optimal: None, seed: None, wall_time_s: None }
    }

    /// Maps external ids back to indices and recomputes route durations;
    /// vehicles without a record get an empty route.
    pub fn to_solution(&self, inst: &Instance) -> Result<Solution> {
        let mut routes: Vec<Route> = Vec::with_capacity(self.routes.len());
        for rec in &self.routes {
            let m = inst
                .vehicles
                .iter()
                .position(|v| v.id == rec.vehicle)
                .ok_or_else(|| Error::UnknownLocation(format!("vehicle {}", rec.vehicle)))?;
            let stops = rec
                .stops
                .iter()
                .map(|&id| inst.target_index(id).ok_or_else(|| Error::UnknownLocation(format!("target {id}"))))
                .collect::<Result<Vec<_>>>()?;
            routes.push(Route::with_stops(m, stops, inst));
        }
        // Vehicles the file leaves out stay at their depots.
        for m in 0..inst.num_vehicles() {
            if !routes.iter().any(|r| r.vehicle == m) {
                routes.push(Route::empty(m, inst));
            }
        }
        routes.sort_by_key(|r| r.vehicle);
        let sol = Solution { routes };
        inst.check_solution(&sol)?;
        Ok(sol)
    }
}
