use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use gcortop::alns::{run_2mls, SearchConfig};
use gcortop::exact_dp::solve_exact;
use gcortop::objective::{ModelKind, ObjectiveModel};
use gcortop::{Instance, Solution};
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One seeded solver run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub model: String,
    pub preset: String,
    pub seed: u64,
    pub objective: f64,
    /// Percentage below the reference; empty without a reference.
    pub gap_pct: Option<f64>,
    pub wall_time_s: f64,
}

/// `(reference − value) / reference` in percent.
pub fn gap_pct(value: f64, reference: f64) -> f64 {
    if reference.abs() < 1e-12 {
        if (value - reference).abs() < 1e-9 {
            0.0
        } else {
            f64::INFINITY
        }
    } else if (reference - value).abs() <= 1e-9 * reference.abs() {
        // Float noise between two equal optima.
        0.0
    } else {
        100.0 * (reference - value) / reference.abs()
    }
}

pub fn build_model(kind: ModelKind, inst: &Instance) -> Result<ObjectiveModel> {
    ObjectiveModel::standard(kind, inst).with_context(|| format!("building the {kind} model for {}", inst.name))
}

/// Independent 2MLS runs with seeds `seed, seed + 1, …`, executed on the
/// worker pool; records come back in seed order.
pub fn solve_runs(
    inst: &Instance,
    kind: ModelKind,
    preset: &str,
    seed: u64,
    runs: usize,
    reference: Option<f64>,
) -> Result<Vec<(RunRecord, Solution)>> {
    let cfg = SearchConfig::preset(preset)?;
    let model = build_model(kind, inst)?;
    (0..runs as u64)
        .into_par_iter()
        .map(|k| {
            let s = seed.wrapping_add(k);
            let t = Instant::now();
            let sol = run_2mls(inst, &model, &cfg, s)?;
            let wall = t.elapsed().as_secs_f64().max(1e-9);
            let objective = model.evaluate(&sol.sampled_mask(inst.num_targets()));
            let rec = RunRecord {
                instance: inst.name.clone(),
                model: kind.name().to_string(),
                preset: preset.to_string(),
                seed: s,
                objective,
                gap_pct: reference.map(|r| gap_pct(objective, r)),
                wall_time_s: wall,
            };
            Ok((rec, sol))
        })
        .collect()
}

/// Index of the best run: highest objective, then shortest mission, then
/// lowest seed.
pub fn best_run(runs: &[(RunRecord, Solution)]) -> Option<usize> {
    (0..runs.len()).min_by(|&a, &b| {
        runs[b].0.objective.total_cmp(&runs[a].0.objective).then(
            runs[a].1.total_duration().total_cmp(&runs[b].1.total_duration()).then(runs[a].0.seed.cmp(&runs[b].0.seed)),
        )
    })
}

/// Reads `instance,best_known` rows; `#` starts a comment line.
pub fn read_references(path: &Path) -> Result<HashMap<String, f64>> {
    #[derive(Deserialize)]
    struct Row {
        instance: String,
        best_known: f64,
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut out = HashMap::new();
    for (k, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(k + 2, |p| p.line() as usize);
            gcortop::Error::Parse { line, msg: e.to_string() }
        })?;
        if out.insert(row.instance.clone(), row.best_known).is_some() {
            bail!("{}: duplicate entry for {}", path.display(), row.instance);
        }
    }
    Ok(out)
}

/// References from the exact solver; instances it cannot close within
/// `time_limit` are left out.
pub fn exact_references(instances: &[Instance], kind: ModelKind, time_limit: Option<Duration>) -> Result<HashMap<String, f64>> {
    let results: Vec<Option<(String, f64)>> = instances
        .par_iter()
        .map(|inst| {
            let model = build_model(kind, inst)?;
            let res = solve_exact(inst, &model, time_limit)?;
            if !res.optimal {
                warn!("{}: exact solver hit the time limit; no reference", inst.name);
                return Ok(None);
            }
            Ok(Some((inst.name.clone(), res.objective)))
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().flatten().collect())
}

/// Benchmark set of an instance: its name up to the first `.` or `-`.
pub fn set_of(name: &str) -> &str {
    name.split(['.', '-']).next().unwrap_or(name)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub set: String,
    pub instance: String,
    pub reference: f64,
    pub best: f64,
    pub average: f64,
    pub best_gap_pct: f64,
    pub avg_gap_pct: f64,
    pub avg_time_s: f64,
}

/// Per-set averages of the per-instance rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetSummary {
    pub set: String,
    pub instances: usize,
    pub avg_gap_pct: f64,
    pub best_gap_pct: f64,
    pub avg_time_s: f64,
}

/// Runs every instance that has a reference `runs` times and reports
/// best/average gaps. Instances without a reference are skipped with a
/// warning.
pub fn benchmark(
    instances: &[Instance],
    references: &HashMap<String, f64>,
    kind: ModelKind,
    preset: &str,
    runs: usize,
    seed: u64,
) -> Result<(Vec<BenchRow>, Vec<SetSummary>)> {
    let mut rows = Vec::new();
    for inst in instances {
        let Some(&reference) = references.get(&inst.name) else {
            warn!("{}: no reference value, skipped", inst.name);
            continue;
        };
        let recs = solve_runs(inst, kind, preset, seed, runs, Some(reference))?;
        let n = recs.len() as f64;
        let best = recs.iter().map(|r| r.0.objective).fold(f64::NEG_INFINITY, f64::max);
        let average = recs.iter().map(|r| r.0.objective).sum::<f64>() / n;
        rows.push(BenchRow {
            set: set_of(&inst.name).to_string(),
            instance: inst.name.clone(),
            reference,
            best,
            average,
            best_gap_pct: gap_pct(best, reference),
            avg_gap_pct: recs.iter().map(|r| gap_pct(r.0.objective, reference)).sum::<f64>() / n,
            avg_time_s: recs.iter().map(|r| r.0.wall_time_s).sum::<f64>() / n,
        });
    }
    rows.sort_by(|a, b| a.set.cmp(&b.set).then(a.instance.cmp(&b.instance)));
    let mut by_set: BTreeMap<&str, Vec<&BenchRow>> = BTreeMap::new();
    for r in &rows {
        by_set.entry(&r.set).or_default().push(r);
    }
    let summary = by_set
        .into_iter()
        .map(|(set, rs)| {
            let n = rs.len() as f64;
            SetSummary {
                set: set.to_string(),
                instances: rs.len(),
                avg_gap_pct: rs.iter().map(|r| r.avg_gap_pct).sum::<f64>() / n,
                best_gap_pct: rs.iter().map(|r| r.best_gap_pct).sum::<f64>() / n,
                avg_time_s: rs.iter().map(|r| r.avg_time_s).sum::<f64>() / n,
            }
        })
        .collect();
    Ok((rows, summary))
}
