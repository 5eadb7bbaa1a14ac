use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gcortop::exact_dp::solve_exact;
use gcortop::instance::SolutionFile;
use gcortop::instance_gen::{self, GenSpec, Generated};
use gcortop::metrics::{self, PCOV_DISTANCES};
use gcortop::objective::ModelKind;
use gcortop::spatial_gp::KernelKind;
use log::info;
use serde::Serialize;

use crate::bench::{self, RunRecord};
use crate::io::{self, load_instance, load_solution, write_atomic, write_json};
use crate::render::{render_geojson, render_svg};

#[derive(Debug, Parser)]
#[command(name = "gcortop", version, about = "Informative multi-UAV mission planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate benchmark instances with simulated contaminant fields.
    Generate(GenerateArgs),
    /// Plan missions with the two-phase multistart search.
    Solve(SolveArgs),
    /// Solve a (small, single-vehicle) instance to optimality.
    Exact(ExactArgs),
    /// Score missions by priority coverage and field-prediction error.
    Evaluate(EvaluateArgs),
    /// Gap report against reference objective values.
    Benchmark(BenchmarkArgs),
    /// Draw an instance and mission as SVG (and GeoJSON).
    Render(RenderArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Full,
    Small,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output directory for instance files and `manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Generate a whole suite instead of a single instance.
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Area as `WIDTHxHEIGHT` in meters.
    #[arg(long, default_value = "1500x1500", value_parser = parse_area)]
    pub area: (f64, f64),
    #[arg(long, default_value_t = 100.0)]
    pub spacing: f64,
    #[arg(long, default_value_t = 1)]
    pub vehicles: usize,
    #[arg(long, default_value_t = 900.0)]
    pub t_max: f64,
    #[arg(long, default_value = "exponential", value_parser = parse_kernel)]
    pub kernel: KernelKind,
    #[arg(long)]
    pub name: Option<String>,
    /// Priority raster CSV (top row = northern edge) replacing the
    /// synthetic priorities.
    #[arg(long)]
    pub priorities: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, default_value = "gcortop", value_parser = parse_model)]
    pub model: ModelKind,
    /// `2mls` or `2mls-f`.
    #[arg(long, default_value = "2mls")]
    pub preset: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Reference objective for gap reporting.
    #[arg(long)]
    pub reference: Option<f64>,
    /// Best solution JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run records CSV (stdout when omitted).
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    pub instance: PathBuf,
    #[arg(long, default_value = "gcortop", value_parser = parse_model)]
    pub model: ModelKind,
    /// Seconds; unlimited when omitted.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Instance with a true field.
    pub instance: PathBuf,
    /// One or more solutions of that instance.
    #[arg(required = true)]
    pub solutions: Vec<PathBuf>,
    /// Coverage distances in meters.
    #[arg(long, value_delimiter = ',', default_values_t = PCOV_DISTANCES.to_vec())]
    pub distances: Vec<f64>,
    /// Metrics CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Directory of instance files (JSON or Chao text).
    pub dir: PathBuf,
    /// CSV with `instance,best_known` rows.
    #[arg(long, conflicts_with = "exact_reference")]
    pub bks: Option<PathBuf>,
    /// Use the exact solver's optimum as the reference.
    #[arg(long)]
    pub exact_reference: bool,
    /// Exact-reference time limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long, default_value = "top", value_parser = parse_model)]
    pub model: ModelKind,
    #[arg(long, default_value = "2mls")]
    pub preset: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// Per-instance rows CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-set summary CSV (stderr table when omitted).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Layer {
    Priority,
    True,
    Predicted,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "priority")]
    pub field: Layer,
    /// SVG output.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub geojson: Option<PathBuf>,
}

fn parse_area(s: &str) -> std::result::Result<(f64, f64), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((p(w)?, p(h)?))
}

fn parse_kernel(s: &str) -> std::result::Result<KernelKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "exponential" | "exp" => Ok(KernelKind::Exponential),
        "matern" => Ok(KernelKind::Matern),
        _ => Err(format!("unknown kernel `{s}` (exponential|matern)")),
    }
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: gcortop::Error| e.to_string())
}

fn secs(limit: Option<f64>) -> Result<Option<Duration>> {
    limit
        .map(|s| Duration::try_from_secs_f64(s).with_context(|| format!("invalid time limit {s}")))
        .transpose()
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Exact(a) => cmd_exact(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Benchmark(a) => cmd_benchmark(&a),
        Command::Render(a) => cmd_render(&a),
    }
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    file: String,
    spec: &'a GenSpec,
    targets: usize,
    kernel: gcortop::spatial_gp::Kernel,
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let generated: Vec<Generated> = match a.suite {
        Some(Suite::Full) => instance_gen::generate_suite(a.seed)?,
        Some(Suite::Small) => instance_gen::generate_small_suite(a.seed)?,
        None => {
            let spec = GenSpec {
                name: a.name.clone().unwrap_or_else(|| {
                    format!("mppes-{}x{}-m{}-t{}-s{}", a.area.0, a.area.1, a.vehicles, a.t_max, a.seed)
                }),
                area: a.area,
                spacing: a.spacing,
                vehicles: a.vehicles,
                t_max: a.t_max,
                kernel_kind: a.kernel,
                seed: a.seed,
            };
            let priorities = match &a.priorities {
                Some(p) => {
                    let f = std::fs::File::open(p).with_context(|| format!("reading {}", p.display()))?;
                    let (cols, rows, u) = instance_gen::read_priority_grid(f).with_context(|| format!("parsing {}", p.display()))?;
                    if (cols, rows) != spec.grid() {
                        bail!("priority grid is {cols}x{rows} but the area needs {:?}", spec.grid());
                    }
                    Some(u)
                }
                None => None,
            };
            vec![instance_gen::generate_with(&spec, priorities)?]
        }
    };
    // Serialize everything before touching the output directory.
    let mut files = Vec::with_capacity(generated.len());
    let mut manifest = Vec::with_capacity(generated.len());
    for g in &generated {
        let file = format!("{}.json", g.spec.name);
        let mut text = serde_json::to_string_pretty(&g.to_file())?;
        text.push('\n');
        files.push((a.out.join(&file), text));
        manifest.push(ManifestEntry { file, spec: &g.spec, targets: g.instance.num_targets(), kernel: g.kernel });
    }
    for (path, text) in &files {
        write_atomic(path, text.as_bytes())?;
    }
    write_json(&a.out.join("manifest.json"), &manifest)?;
    info!("wrote {} instances to {}", files.len(), a.out.display());
    Ok(())
}

pub fn cmd_solve(a: &SolveArgs) -> Result<()> {
    if a.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let inst = load_instance(&a.instance)?.instance;
    let runs = bench::solve_runs(&inst, a.model, &a.preset, a.seed, a.runs, a.reference)?;
    let best = bench::best_run(&runs).expect("at least one run");
    let (rec, sol) = &runs[best];
    let records: Vec<&RunRecord> = runs.iter().map(|r| &r.0).collect();
    if let Some(out) = &a.out {
        let mut file = SolutionFile::from_solution(&inst, sol, rec.objective);
        file.model = Some(a.model.name().to_string());
        file.seed = Some(rec.seed);
        file.wall_time_s = Some(rec.wall_time_s);
        write_json(out, &file)?;
    }
    io::emit_csv(a.records.as_deref(), &records)?;
    let avg = records.iter().map(|r| r.objective).sum::<f64>() / records.len() as f64;
    let avg_t = records.iter().map(|r| r.wall_time_s).sum::<f64>() / records.len() as f64;
    eprintln!(
        "{}: best {:.6} (seed {}), average {:.6} over {} runs, {:.3} s/run",
        inst.name,
        rec.objective,
        rec.seed,
        avg,
        records.len(),
        avg_t
    );
    Ok(())
}

pub fn cmd_exact(a: &ExactArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?.instance;
    let model = bench::build_model(a.model, &inst)?;
    let t = Instant::now();
    let res = solve_exact(&inst, &model, secs(a.time_limit)?)?;
    let wall = t.elapsed().as_secs_f64();
    let mut file = SolutionFile::from_solution(&inst, &res.solution, res.objective);
    file.model = Some(a.model.name().to_string());
    file.optimal = Some(res.optimal);
    file.wall_time_s = Some(wall);
    match &a.out {
        Some(out) => write_json(out, &file)?,
        None => println!("{}", serde_json::to_string_pretty(&file)?),
    }
    eprintln!(
        "{}: objective {:.6} ({}), {:.3} s",
        inst.name,
        res.objective,
        if res.optimal { "optimal" } else { "time limit reached" },
        wall
    );
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let loaded = load_instance(&a.instance)?;
    let inst = &loaded.instance;
    let truth = loaded
        .true_field
        .as_ref()
        .with_context(|| format!("{} has no true field to evaluate against", a.instance.display()))?;
    let mut dists = a.distances.clone();
    dists.sort_by(f64::total_cmp);
    dists.dedup();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["instance", "model", "vehicles", "t_max"].map(String::from).to_vec();
    header.extend(dists.iter().map(|d| format!("pcov{d}")));
    header.extend(["mae", "me", "wmae", "runtime_s"].map(String::from));
    w.write_record(&header)?;
    for path in &a.solutions {
        let (file, sol) = load_solution(path, inst)?;
        let report = metrics::evaluate_mission_at(inst, &sol, truth, &dists)
            .with_context(|| format!("evaluating {}", path.display()))?;
        let t_max = inst.vehicles.iter().map(|v| v.t_max).fold(0.0, f64::max);
        let mut row = vec![
            inst.name.clone(),
            file.model.clone().unwrap_or_default(),
            inst.num_vehicles().to_string(),
            t_max.to_string(),
        ];
        row.extend(report.pcov.iter().map(|p| p.1.to_string()));
        row.extend([report.mae.to_string(), report.me.to_string(), report.wmae.to_string(), fmt_opt(file.wall_time_s)]);
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    match &a.out {
        Some(p) => write_atomic(p, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

/// Instance files (`.json`, Chao `.txt`) of a directory in name order;
/// `manifest.json` and hidden files are ignored.
pub fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let p = e?.path();
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("");
        if p.is_file() && matches!(ext, "json" | "txt") && !name.starts_with('.') && name != "manifest.json" {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

pub fn cmd_benchmark(a: &BenchmarkArgs) -> Result<()> {
    if a.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let instances = instance_files(&a.dir)?
        .iter()
        .map(|p| load_instance(p).map(|l| l.instance))
        .collect::<Result<Vec<_>>>()?;
    let references = match (&a.bks, a.exact_reference) {
        (Some(p), _) => bench::read_references(p)?,
        (None, true) => bench::exact_references(&instances, a.model, secs(a.time_limit)?)?,
        (None, false) => bail!("a reference is required: --bks FILE or --exact-reference"),
    };
    let (rows, summary) = bench::benchmark(&instances, &references, a.model, &a.preset, a.runs, a.seed)?;
    io::emit_csv(a.out.as_deref(), &rows)?;
    match &a.summary {
        Some(p) => write_atomic(p, &io::csv_bytes(&summary)?)?,
        None => {
            eprintln!("{:<10} {:>5} {:>10} {:>10} {:>10}", "set", "n", "avg gap%", "best gap%", "time s");
            for s in &summary {
                eprintln!(
                    "{:<10} {:>5} {:>10.2} {:>10.2} {:>10.2}",
                    s.set, s.instances, s.avg_gap_pct, s.best_gap_pct, s.avg_time_s
                );
            }
        }
    }
    Ok(())
}

pub fn cmd_render(a: &RenderArgs) -> Result<()> {
    let loaded = load_instance(&a.instance)?;
    let inst = &loaded.instance;
    let sol = a.solution.as_ref().map(|p| load_solution(p, inst).map(|s| s.1)).transpose()?;
    let (values, label) = match a.field {
        Layer::Priority => (inst.priorities.clone(), "priority"),
        Layer::True => {
            let t = loaded.true_field.as_ref().context("instance has no true field")?;
            (t.values.clone(), "true")
        }
        Layer::Predicted => {
            let t = loaded.true_field.as_ref().context("instance has no true field")?;
            let s = sol.as_ref().context("--field predicted needs --solution")?;
            (metrics::predict(inst, &s.sampled(), t)?.0, "predicted")
        }
    };
    let svg = render_svg(inst, sol.as_ref(), &values, label);
    let geo = a.geojson.as_ref().map(|_| render_geojson(inst, sol.as_ref(), &values, label));
    write_atomic(&a.out, svg.as_bytes())?;
    if let (Some(p), Some(g)) = (&a.geojson, geo) {
        write_json(p, &g)?;
    }
    Ok(())
}
