//! Reproduction experiments: small-suite optimality, benchmark gaps, model
//! ordering on generated missions and runtime on the largest grids.

use std::collections::HashMap;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{bail, Result};
use gcortop::alns::{run_2mls, SearchConfig};
use gcortop::exact_dp::solve_exact;
use gcortop::instance_gen::{generate, generate_small_suite, suite_specs, GenSpec};
use gcortop::metrics::evaluate_mission;
use gcortop::objective::{ModelKind, ObjectiveModel};
use gcortop_cli::bench::{self, BenchRow};
use gcortop_cli::commands::instance_files;
use gcortop_cli::io::load_instance;
use rayon::prelude::*;

/// One solved small-suite instance.
#[derive(Clone, Debug)]
pub struct OptimalityRow {
    pub instance: String,
    pub targets: usize,
    pub optimum: f64,
    pub optimal: bool,
    pub exact_s: f64,
    pub best_heuristic: f64,
}

impl OptimalityRow {
    pub fn matches(&self, tol: f64) -> bool {
        (self.best_heuristic - self.optimum).abs() <= tol
    }
}

/// Single-vehicle small-suite members with at most `max_targets` targets,
/// solved exactly (capped at `cap`) and by `runs` seeded 2MLS runs.
pub fn small_suite_optimality(master_seed: u64, kind: ModelKind, max_targets: usize, cap: Duration, runs: usize) -> Result<Vec<OptimalityRow>> {
    let suite: Vec<_> = generate_small_suite(master_seed)?
        .into_iter()
        .filter(|g| g.instance.num_vehicles() == 1 && g.instance.num_targets() <= max_targets)
        .collect();
    let cfg = SearchConfig::standard();
    suite
        .par_iter()
        .map(|g| {
            let inst = &g.instance;
            let model = ObjectiveModel::standard(kind, inst)?;
            let t = Instant::now();
            let exact = solve_exact(inst, &model, Some(cap))?;
            let exact_s = t.elapsed().as_secs_f64();
            let best_heuristic = (1..=runs as u64)
                .into_par_iter()
                .map(|s| run_2mls(inst, &model, &cfg, s).map(|sol| model.evaluate(&sol.sampled_mask(inst.num_targets()))))
                .collect::<gcortop::Result<Vec<f64>>>()?
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(OptimalityRow {
                instance: inst.name.clone(),
                targets: inst.num_targets(),
                optimum: exact.objective,
                optimal: exact.optimal,
                exact_s,
                best_heuristic,
            })
        })
        .collect()
}

/// Benchmark rows of the instances in `dir` belonging to `sets`, against
/// the references in `bks`. Fails when a set has no instance or an
/// instance has no reference, so a partial table can't pass for a full one.
pub fn set_gaps(dir: &Path, bks: &Path, sets: &[&str], preset: &str, runs: usize) -> Result<Vec<BenchRow>> {
    let references = bench::read_references(bks)?;
    let mut instances = Vec::new();
    for p in instance_files(dir)? {
        let inst = load_instance(&p)?.instance;
        if sets.contains(&bench::set_of(&inst.name)) {
            if !references.contains_key(&inst.name) {
                bail!("{}: no reference value in {}", inst.name, bks.display());
            }
            instances.push(inst);
        }
    }
    for set in sets {
        if !instances.iter().any(|i| bench::set_of(&i.name) == *set) {
            bail!("no instances of set {set} in {}", dir.display());
        }
    }
    Ok(bench::benchmark(&instances, &references, ModelKind::Top, preset, runs, 1)?.0)
}

pub const ORDERING_MODELS: [ModelKind; 3] = [ModelKind::Top, ModelKind::Cortop, ModelKind::Gcortop];

/// Mean metrics per model over the evaluated missions.
#[derive(Clone, Debug, Default)]
pub struct OrderingReport {
    pub instances: usize,
    /// Indexed like [`ORDERING_MODELS`].
    pub pcov0: [f64; 3],
    pub pcov300: [f64; 3],
    pub mae: [f64; 3],
}

/// `count` generated instances spread evenly over the suite (every area,
/// fleet size and duration), each planned with 2MLS-f under TOP, CorTOP
/// and GCorTOP and scored against its true field.
pub fn model_ordering(master_seed: u64, count: usize) -> Result<OrderingReport> {
    let specs = suite_specs(master_seed);
    let step = (specs.len() / count.max(1)).max(1);
    let picked: Vec<&GenSpec> = specs.iter().step_by(step).take(count).collect();
    let cfg = SearchConfig::fast();
    let rows: Vec<[(f64, f64, f64); 3]> = picked
        .par_iter()
        .map(|spec| {
            let g = generate(spec)?;
            let mut out = [(0.0, 0.0, 0.0); 3];
            for (k, &kind) in ORDERING_MODELS.iter().enumerate() {
                let model = ObjectiveModel::standard(kind, &g.instance)?;
                let sol = run_2mls(&g.instance, &model, &cfg, 1)?;
                let r = evaluate_mission(&g.instance, &sol, &g.true_field)?;
                out[k] = (r.pcov_at(0.0).unwrap_or(0.0), r.pcov_at(300.0).unwrap_or(0.0), r.mae);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let n = rows.len() as f64;
    let mut rep = OrderingReport { instances: rows.len(), ..Default::default() };
    for k in 0..3 {
        rep.pcov0[k] = rows.iter().map(|r| r[k].0).sum::<f64>() / n;
        rep.pcov300[k] = rows.iter().map(|r| r[k].1).sum::<f64>() / n;
        rep.mae[k] = rows.iter().map(|r| r[k].2).sum::<f64>() / n;
    }
    Ok(rep)
}

/// Wall time of one 2MLS-f GCorTOP run on every suite instance with at
/// least `min_targets` targets. Runs are sequential so timings are not
/// inflated by each other.
pub fn large_instance_times(master_seed: u64, min_targets: usize) -> Result<Vec<(String, f64)>> {
    let cfg = SearchConfig::fast();
    let mut out = Vec::new();
    for spec in suite_specs(master_seed) {
        let (c, r) = spec.grid();
        if c * r < min_targets {
            continue;
        }
        let g = generate(&spec)?;
        let model = ObjectiveModel::standard(ModelKind::Gcortop, &g.instance)?;
        let t = Instant::now();
        run_2mls(&g.instance, &model, &cfg, 1)?;
        out.push((spec.name, t.elapsed().as_secs_f64()));
    }
    Ok(out)
}

/// Mean of a column of benchmark rows.
pub fn mean_by<F: Fn(&BenchRow) -> f64>(rows: &[BenchRow], f: F) -> f64 {
    rows.iter().map(f).sum::<f64>() / rows.len().max(1) as f64
}

/// Per-set averages, for reporting.
pub fn per_set<F: Fn(&BenchRow) -> f64>(rows: &[BenchRow], f: F) -> HashMap<String, f64> {
    let mut acc: HashMap<String, (f64, usize)> = HashMap::new();
    for r in rows {
        let e = acc.entry(r.set.clone()).or_default();
        e.0 += f(r);
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}
