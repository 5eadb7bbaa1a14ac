//! Synthetic benchmark generator: square-grid target areas with clustered
//! "population" priorities, random border depots, and a GP-sampled true
//! contaminant field per instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceFile, Location, MotionModel, Vehicle};
use crate::spatial_gp::{FieldSample, GaussianField, Kernel, KernelKind};

/// Target areas of the benchmark suite, in meters.
pub const AREAS: [(f64, f64); 5] = [(1500.0, 1500.0), (1500.0, 2000.0), (2000.0, 2000.0), (2500.0, 2000.0), (2500.0, 2500.0)];
pub const FLEETS: [usize; 3] = [1, 2, 3];
pub const DURATIONS: [f64; 5] = [600.0, 900.0, 1200.0, 1500.0, 1800.0];
/// Priority/field draws per (area, fleet, duration) combination.
pub const DRAWS: usize = 6;
pub const SPACING: f64 = 100.0;

/// Small-suite grid sides, budgets and fleet sizes.
pub const SMALL_SIDES: [usize; 4] = [4, 5, 6, 7];
pub const SMALL_DURATIONS: [f64; 7] = [100.0, 125.0, 150.0, 175.0, 200.0, 225.0, 250.0];
pub const SMALL_FLEETS: [usize; 2] = [1, 2];

const V_MAX: f64 = 7.0;
const ACCEL: f64 = 2.0;
const SENSING: f64 = 2.0;
const BACKGROUND: f64 = 1.0;
const PEAK: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub name: String,
    /// `(width, height)` in meters; targets sit at cell centers.
    pub area: (f64, f64),
    pub spacing: f64,
    pub vehicles: usize,
    pub t_max: f64,
    pub kernel_kind: KernelKind,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let (cols, rows) = self.grid();
        if !(self.spacing > 0.0) || cols == 0 || rows == 0 || self.vehicles == 0 || !(self.t_max > 0.0) {
            return Err(Error::InvalidParameter(format!("degenerate generator spec {self:?}")));
        }
        Ok(())
    }

    /// Grid columns and rows.
    pub fn grid(&self) -> (usize, usize) {
        ((self.area.0 / self.spacing).round() as usize, (self.area.1 / self.spacing).round() as usize)
    }
}

/// A generated instance with its simulated contaminant field.
#[derive(Clone, Debug)]
pub struct Generated {
    pub spec: GenSpec,
    pub instance: Instance,
    pub true_field: FieldSample,
    pub kernel: Kernel,
}

impl Generated {
    pub fn to_file(&self) -> InstanceFile {
        InstanceFile::from_instance(&self.instance, Some(self.true_field.values.clone()))
    }
}

fn grid_targets(cols: usize, rows: usize, spacing: f64) -> Vec<Location> {
    (0..rows * cols)
        .map(|k| Location::new(k, spacing * ((k % cols) as f64 + 0.5), spacing * ((k / cols) as f64 + 0.5)))
        .collect()
}

/// Max-of-Gaussians field: 3–8 blobs with the tallest at 100, a floor of 1,
/// quantized to integers.
pub fn blob_priorities<R: Rng + ?Sized>(targets: &[Location], area: (f64, f64), rng: &mut R) -> Vec<f64> {
    let k = rng.random_range(3..=8);
    let scale = area.0.min(area.1);
    let blobs: Vec<(f64, f64, f64, f64)> = (0..k)
        .map(|b| {
            let amp = if b == 0 { PEAK } else { rng.random_range(0.2 * PEAK..PEAK) };
            let width = rng.random_range(0.04 * scale..0.12 * scale);
            (rng.random_range(0.0..area.0), rng.random_range(0.0..area.1), width, amp)
        })
        .collect();
    let raw: Vec<f64> = targets
        .iter()
        .map(|t| {
            blobs
                .iter()
                .map(|&(x, y, w, a)| a * (-((t.x - x).powi(2) + (t.y - y).powi(2)) / (2.0 * w * w)).exp())
                .fold(BACKGROUND, f64::max)
        })
        .collect();
    // Rescale so the highest target sits exactly at the peak even when no
    // grid point falls on a blob center.
    let top = raw.iter().copied().fold(BACKGROUND, f64::max);
    raw.iter().map(|&v| (BACKGROUND + (v - BACKGROUND) * (PEAK - BACKGROUND) / (top - BACKGROUND).max(1e-12)).round()).collect()
}

/// Indices of the outermost ring of a `cols × rows` grid.
fn border_cells(cols: usize, rows: usize) -> Vec<usize> {
    (0..rows * cols).filter(|&k| k % cols == 0 || k % cols == cols - 1 || k / cols == 0 || k / cols == rows - 1).collect()
}

/// Builds one instance; a pure function of `spec`.
pub fn generate(spec: &GenSpec) -> Result<Generated> {
    generate_with(spec, None)
}

/// Like [`generate`], with priorities taken from `priorities` (row-major,
/// matching the spec's grid) instead of the synthetic field.
pub fn generate_with(spec: &GenSpec, priorities: Option<Vec<f64>>) -> Result<Generated> {
    spec.validate()?;
    let (cols, rows) = spec.grid();
    let targets = grid_targets(cols, rows, spec.spacing);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let synthetic = blob_priorities(&targets, spec.area, &mut rng);
    let priorities = match priorities {
        Some(p) if p.len() != targets.len() => {
            return Err(Error::InvalidParameter(format!("{} priorities for a {cols}×{rows} grid", p.len())))
        }
        Some(p) => p,
        None => synthetic,
    };

    let border = border_cells(cols, rows);
    let mut depots = Vec::with_capacity(2 * spec.vehicles);
    let mut vehicles = Vec::with_capacity(spec.vehicles);
    for id in 0..spec.vehicles {
        for _ in 0..2 {
            let t = targets[border[rng.random_range(0..border.len())]];
            depots.push(Location::new(depots.len(), t.x, t.y));
        }
        vehicles.push(Vehicle { id, start: 2 * id, end: 2 * id + 1, t_max: spec.t_max });
    }

    let length_scale = rng.random_range(200.0..=600.0);
    let kernel = Kernel::new(spec.kernel_kind, 1.0, length_scale)?;
    let true_field = GaussianField::from_kernel(&targets, 0.0, &kernel).sample_prior(&mut rng)?;

    let instance = Instance::new(
        spec.name.clone(),
        targets,
        priorities,
        depots,
        vehicles,
        MotionModel::uav(V_MAX, ACCEL),
        SENSING,
    )?;
    Ok(Generated { spec: spec.clone(), instance, true_field, kernel })
}

/// Specs of the 450-instance suite: 5 areas × 3 fleets × 5 durations ×
/// 6 draws, kernels alternating between draws, seeds derived from
/// `master_seed` in this order.
pub fn suite_specs(master_seed: u64) -> Vec<GenSpec> {
    let mut master = ChaCha8Rng::seed_from_u64(master_seed);
    let mut specs = Vec::with_capacity(AREAS.len() * FLEETS.len() * DURATIONS.len() * DRAWS);
    for &area in &AREAS {
        for &vehicles in &FLEETS {
            for &t_max in &DURATIONS {
                for draw in 0..DRAWS {
                    specs.push(GenSpec {
                        name: format!("mppes-{}x{}-m{vehicles}-t{t_max}-d{draw}", area.0, area.1),
                        area,
                        spacing: SPACING,
                        vehicles,
                        t_max,
                        kernel_kind: alternate(draw),
                        seed: master.random(),
                    });
                }
            }
        }
    }
    specs
}

/// Specs of the small exact-solvable suite: 4×4 to 7×7 grids, budgets from
/// 100 to 250 s, one or two vehicles.
pub fn small_suite_specs(master_seed: u64) -> Vec<GenSpec> {
    let mut master = ChaCha8Rng::seed_from_u64(master_seed);
    let mut specs = Vec::new();
    for &side in &SMALL_SIDES {
        for &vehicles in &SMALL_FLEETS {
            for (k, &t_max) in SMALL_DURATIONS.iter().enumerate() {
                let edge = side as f64 * SPACING;
                specs.push(GenSpec {
                    name: format!("small-{side}x{side}-m{vehicles}-t{t_max}"),
                    area: (edge, edge),
                    spacing: SPACING,
                    vehicles,
                    t_max,
                    kernel_kind: alternate(k),
                    seed: master.random(),
                });
            }
        }
    }
    specs
}

fn alternate(k: usize) -> KernelKind {
    if k % 2 == 0 {
        KernelKind::Exponential
    } else {
        KernelKind::Matern
    }
}

/// Generates every spec in parallel; output order follows `specs`.
pub fn generate_all(specs: &[GenSpec]) -> Result<Vec<Generated>> {
    specs.par_iter().map(generate).collect()
}

pub fn generate_suite(master_seed: u64) -> Result<Vec<Generated>> {
    generate_all(&suite_specs(master_seed))
}

pub fn generate_small_suite(master_seed: u64) -> Result<Vec<Generated>> {
    generate_all(&small_suite_specs(master_seed))
}

/// Reads a priority raster: one CSV row per grid row (top row first), one
/// nonnegative number per cell. Returns `(cols, rows, row-major values)`
/// with rows reordered bottom-up to match the generator's grid.
pub fn read_priority_grid<R: std::io::Read>(reader: R) -> Result<(usize, usize, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse { line: line + 1, msg: e.to_string() })?;
        let row = rec
            .iter()
            .map(|f| match f.parse::<f64>() {
                Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
                _ => Err(Error::Parse { line: line + 1, msg: format!("bad priority {f:?}") }),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if cols == 0 {
        return Err(Error::Parse { line: 1, msg: "empty priority grid".into() });
    }
    rows.reverse();
    Ok((cols, rows.len(), rows.concat()))
}
