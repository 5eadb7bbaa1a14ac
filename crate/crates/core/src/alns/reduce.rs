use crate::error::{Error, Result};
use crate::instance::{Instance, Location, Route, Solution};

/// A grid-aggregated problem: one representative target per cell carrying
/// the cell's total value.
#[derive(Clone, Debug)]
pub struct Aggregation {
    pub instance: Instance,
    /// Parent index of each reduced target.
    pub representatives: Vec<usize>,
    /// Parent indices grouped by cell, aligned with `representatives`.
    pub members: Vec<Vec<usize>>,
    pub values: Vec<f64>,
}

impl Aggregation {
    /// Maps a reduced solution to the parent problem. Representatives are
    /// parent targets, so routes and durations carry over unchanged.
    pub fn lift(&self, parent: &Instance, sol: &Solution) -> Solution {
        Solution {
            routes: sol
                .routes
                .iter()
                .map(|r| {
                    let stops = r.stops.iter().map(|&k| self.representatives[k]).collect();
                    Route::with_stops(r.vehicle, stops, parent)
                })
                .collect(),
        }
    }
}

/// Cell shape `(cols, rows)` for a group size.
fn cell_shape(group: usize) -> Result<(usize, usize)> {
    match group {
        4 => Ok((2, 2)),
        6 => Ok((3, 2)),
        9 => Ok((3, 3)),
        _ => Err(Error::InvalidParameter(format!("cell group size {group} is not one of 4, 6, 9"))),
    }
}

/// Groups grid targets into cells of `group` locations (fewer at the border)
/// and keeps, per cell, the member closest to the value-weighted centroid.
/// `values` are the per-target weights to aggregate (priorities, or ones for
/// unit-value models). Returns `None` when the targets do not form a grid.
pub fn aggregate_grid(inst: &Instance, values: &[f64], group: usize) -> Result<Option<Aggregation>> {
    let (cw, ch) = cell_shape(group)?;
    let Some(grid) = inst.grid_layout() else {
        return Ok(None);
    };
    let ncx = grid.cols.div_ceil(cw);
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); ncx * grid.rows.div_ceil(ch)];
    for (i, &(c, r)) in grid.cells.iter().enumerate() {
        cells[(r / ch) * ncx + c / cw].push(i);
    }
    cells.retain(|c| !c.is_empty());

    let mut representatives = Vec::with_capacity(cells.len());
    let mut agg = Vec::with_capacity(cells.len());
    for cell in &cells {
        let total: f64 = cell.iter().map(|&i| values[i]).sum();
        let weight = |i: usize| if total > 0.0 { values[i] / total } else { 1.0 / cell.len() as f64 };
        let cx: f64 = cell.iter().map(|&i| weight(i) * inst.targets[i].x).sum();
        let cy: f64 = cell.iter().map(|&i| weight(i) * inst.targets[i].y).sum();
        let center = Location::new(0, cx, cy);
        let rep = *cell
            .iter()
            .min_by(|&&a, &&b| {
                inst.targets[a].distance(&center).total_cmp(&inst.targets[b].distance(&center)).then(a.cmp(&b))
            })
            .expect("cells are non-empty");
        representatives.push(rep);
        agg.push(total);
    }
    let instance = inst.restrict(&representatives, agg.clone())?;
    Ok(Some(Aggregation { instance, representatives, members: cells, values: agg }))
}

fn point_segment_distance(p: &Location, a: &Location, b: &Location) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(&Location::new(0, a.x + t * dx, a.y + t * dy))
}

/// Splits the targets among vehicles: each target goes to the vehicle whose
/// seed tour `start → seed → end` passes closest (lowest vehicle index on
/// ties). Vehicles without a seed use the direct tour.
pub fn decompose_vehicles(inst: &Instance, seeds: &[Option<usize>]) -> Vec<Vec<usize>> {
    let tours: Vec<Vec<Location>> = (0..inst.num_vehicles())
        .map(|m| {
            let v = &inst.vehicles[m];
            let mut t = vec![inst.depots[v.start]];
            if let Some(s) = seeds[m] {
                t.push(inst.targets[s]);
            }
            t.push(inst.depots[v.end]);
            t
        })
        .collect();
    let mut parts = vec![Vec::new(); inst.num_vehicles()];
    if parts.is_empty() {
        return parts;
    }
    for (i, p) in inst.targets.iter().enumerate() {
        let dist = |t: &Vec<Location>| {
            t.windows(2).map(|w| point_segment_distance(p, &w[0], &w[1])).fold(f64::INFINITY, f64::min)
        };
        let mut best = 0;
        let mut best_d = dist(&tours[0]);
        for (m, t) in tours.iter().enumerate().skip(1) {
            let d = dist(t);
            if d < best_d {
                best = m;
                best_d = d;
            }
        }
        parts[best].push(i);
    }
    parts
}
