//! Command-line driver: run configurations, parameter sweeps, state
//! inspection and graph export.
//!
//! Exit codes: 0 success, 2 invalid input (unreadable or invalid config,
//! bad state file, unknown label), 3 numerical failure (a sub-search
//! diverged, a plan step did not converge, a state is not stationary, or a
//! sweep value failed). Artifacts are written to a temporary name and
//! renamed into place.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::ghisd::measure_index;
use crate::landscape::{
    build_landscape, export_graph, field_file_name, import_json, state_from_bytes, state_to_bytes,
    Directive, ExportFormat, LandscapeGraph, Node, Seed, INLINE_LIMIT,
};
use crate::state::StateVector;
use crate::systems::{make_system, residual, DynamicalSystem, SymmetrySpec, SystemSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_FAILED: i32 = 3;

/// Value range mapped onto the 8-bit grey levels of PGM dumps.
const PGM_RANGE: f64 = 1.2;

/// Initial guess in a run configuration. Exactly one of `values`,
/// `constant` and `file` is given; files are little-endian `f64` dumps or
/// JSON arrays, resolved relative to the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

/// A complete run: system, search overrides, seeds and plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    /// Overrides on top of the system's default [`SearchConfig`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<serde_json::Value>,
    /// Defaults to the system's own symmetry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetrySpec>,
    #[serde(default)]
    pub seeds: Vec<SeedSpec>,
    #[serde(default)]
    pub plan: Vec<Directive>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Everything a run needs, resolved and validated.
pub struct Prepared {
    pub system: Box<dyn DynamicalSystem>,
    pub search: SearchConfig,
    pub symmetry: SymmetrySpec,
    pub seeds: Vec<Seed>,
    pub plan: Vec<Directive>,
}

fn read_state(system: &dyn DynamicalSystem, path: &Path) -> Result<StateVector> {
    let bytes = fs::read(path)?;
    let state = if path.extension().is_some_and(|e| e == "json") {
        let doc: serde_json::Value = serde_json::from_slice(&bytes)?;
        let values: Vec<f64> = match doc.get("values") {
            Some(v) => serde_json::from_value(v.clone())?,
            None => serde_json::from_value(doc)?,
        };
        system.state(values)
    } else {
        state_from_bytes(&bytes, system.grid())?
    };
    if state.dim() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: state.dim(),
        });
    }
    Ok(state)
}

fn seed_state(system: &dyn DynamicalSystem, spec: &SeedSpec, base: &Path) -> Result<StateVector> {
    let field = |f: &str| format!("seeds.{}.{f}", spec.name);
    match (&spec.values, spec.constant, &spec.file) {
        (Some(v), None, None) => {
            if v.len() != system.dim() {
                return Err(Error::invalid(
                    field("values"),
                    format!("expected {} entries, found {}", system.dim(), v.len()),
                ));
            }
            Ok(system.state(v.clone()))
        }
        (None, Some(c), None) => Ok(system.state(vec![c; system.dim()])),
        (None, None, Some(f)) => read_state(system, &base.join(f)),
        _ => Err(Error::invalid(
            format!("seeds.{}", spec.name),
            "give exactly one of `values`, `constant`, `file`",
        )),
    }
}

/// Resolves a configuration against the directory its relative paths refer to.
pub fn prepare(cfg: &RunConfig, base: &Path) -> Result<Prepared> {
    let system = make_system(&cfg.system)?;
    let search = SearchConfig::resolve(&cfg.system, cfg.search.as_ref())?;
    let symmetry = cfg.symmetry.unwrap_or_else(|| system.symmetry());
    let mut seeds = Vec::with_capacity(cfg.seeds.len());
    for s in &cfg.seeds {
        if seeds.iter().any(|t: &Seed| t.name == s.name) {
            return Err(Error::invalid(
                format!("seeds.{}", s.name),
                "duplicate seed name",
            ));
        }
        seeds.push(Seed::new(
            s.name.clone(),
            seed_state(system.as_ref(), s, base)?,
        ));
    }
    for d in &cfg.plan {
        let seed = match d {
            Directive::Seed { seed } | Directive::Find { seed, .. } => seed,
            _ => continue,
        };
        if !seeds.iter().any(|s| &s.name == seed) {
            return Err(Error::invalid("plan", format!("unknown seed `{seed}`")));
        }
    }
    Ok(Prepared {
        system,
        search,
        symmetry,
        seeds,
        plan: cfg.plan.clone(),
    })
}

/// Counts reported in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub nodes: usize,
    pub edges: usize,
    /// `nodes_per_index[k]` is the number of nodes of index `k`.
    pub nodes_per_index: Vec<usize>,
    /// Edges grouped by the index of their parent.
    pub edges_per_parent_index: Vec<usize>,
    pub diverged: usize,
}

impl Outcome {
    pub fn of(graph: &LandscapeGraph) -> Self {
        let nodes_per_index = graph.index_counts();
        let mut edges_per_parent_index = vec![0; nodes_per_index.len()];
        for e in &graph.edges {
            if let Some(n) = graph.node(&e.parent) {
                edges_per_parent_index[n.index] += 1;
            }
        }
        Outcome {
            nodes: graph.nodes.len(),
            edges: graph.edges.len(),
            nodes_per_index,
            edges_per_parent_index,
            diverged: graph.metadata.diverged,
        }
    }
}

/// Run log written next to the landscape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub output_directory: PathBuf,
    pub command: String,
    pub wall_time_seconds: f64,
    pub threads: usize,
    pub outcome: Outcome,
    pub warnings: Vec<String>,
    pub exit_code: i32,
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Binary greyscale image of a grid state, `[-1.2, 1.2]` mapped linearly to
/// `0..=255`, with `y` increasing upwards.
pub fn pgm_bytes(state: &StateVector) -> Result<Vec<u8>> {
    let g = state.grid.ok_or(Error::MissingGrid)?;
    let mut out = format!("P5\n{} {}\n255\n", g.cols, g.rows).into_bytes();
    for row in (0..g.rows).rev() {
        for v in &state.values[row * g.cols..(row + 1) * g.cols] {
            let t = ((v + PGM_RANGE) / (2.0 * PGM_RANGE)).clamp(0.0, 1.0);
            out.push((t * 255.0).round() as u8);
        }
    }
    Ok(out)
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    Ok(pool.install(f))
}

/// Result of [`run_config`]: the graph and the manifest already on disk.
pub struct RunReport {
    pub graph: LandscapeGraph,
    pub manifest: RunManifest,
}

fn write_artifacts(graph: &LandscapeGraph, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    for node in &graph.nodes {
        if node.state.grid.is_some() {
            let f64_path = out.join(field_file_name(&node.label));
            write_atomic(&f64_path, &state_to_bytes(&node.state))?;
            write_atomic(&f64_path.with_extension("pgm"), &pgm_bytes(&node.state)?)?;
        }
    }
    write_atomic(
        &out.join("landscape.dot"),
        &export_graph(graph, ExportFormat::Dot),
    )?;
    write_atomic(
        &out.join("landscape.json"),
        &export_graph(graph, ExportFormat::Json),
    )?;
    Ok(())
}

/// Builds the landscape for `cfg` and writes landscape.json,
/// landscape.dot, manifest.json and per-node field dumps into `out`.
pub fn run_config(
    cfg: &RunConfig,
    config_path: &Path,
    out: &Path,
    threads: usize,
    command: &str,
) -> Result<RunReport> {
    let start = Instant::now();
    let base = config_path.parent().unwrap_or(Path::new("."));
    let prepared = prepare(cfg, base)?;
    let mut graph = with_threads(threads, || {
        build_landscape(
            prepared.system.as_ref(),
            &prepared.seeds,
            &prepared.plan,
            &prepared.search,
            prepared.symmetry,
        )
    })??;
    graph.metadata.system = Some(cfg.system.clone());
    write_artifacts(&graph, out)?;
    let manifest = RunManifest {
        config_path: config_path.to_path_buf(),
        output_directory: out.to_path_buf(),
        command: command.to_string(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        threads: threads.max(1),
        outcome: Outcome::of(&graph),
        warnings: graph.metadata.warnings.clone(),
        exit_code: if graph.metadata.diverged > 0 {
            EXIT_FAILED
        } else {
            EXIT_OK
        },
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_atomic(&out.join("manifest.json"), text.as_bytes())?;
    Ok(RunReport { graph, manifest })
}

/// Exit code for an error: input problems are 2, numerical failures 3.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NotStationary { .. }
        | Error::NotConverged(_)
        | Error::DegenerateFrame { .. }
        | Error::Unsupported(_) => EXIT_FAILED,
        Error::DimensionMismatch { .. }
        | Error::MissingGrid
        | Error::Invalid { .. }
        | Error::UnknownLabel(_)
        | Error::Io(_)
        | Error::Json(_) => EXIT_INVALID,
    }
}

fn report(err: &Error, context: &str) -> i32 {
    eprintln!("error: {context}: {err}");
    exit_code_for(err)
}

/// `run`: one landscape from a configuration file.
pub fn cmd_run(config: &Path, out: &Path, threads: usize) -> i32 {
    let cfg = match RunConfig::load(config) {
        Ok(c) => c,
        Err(e) => return report(&e, &config.display().to_string()),
    };
    let command = format!("run --config {} --out {}", config.display(), out.display());
    match run_config(&cfg, config, out, threads, &command) {
        Ok(r) => {
            let o = &r.manifest.outcome;
            println!(
                "{} nodes {:?} (by index), {} edges, {} diverged -> {}",
                o.nodes,
                o.nodes_per_index,
                o.edges,
                o.diverged,
                out.display()
            );
            r.manifest.exit_code
        }
        Err(e) => report(&e, &config.display().to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    Kappa,
    Gamma,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::Kappa => "kappa",
            SweepParameter::Gamma => "gamma",
        })
    }
}

/// Copy of `spec` with the swept parameter replaced.
pub fn with_parameter(
    spec: &SystemSpec,
    parameter: SweepParameter,
    value: f64,
) -> Result<SystemSpec> {
    let mut s = spec.clone();
    match (&mut s, parameter) {
        (SystemSpec::AllenCahn { kappa, .. }, SweepParameter::Kappa)
        | (SystemSpec::ShearedPhaseField { kappa, .. }, SweepParameter::Kappa) => *kappa = value,
        (SystemSpec::ShearedPhaseField { gamma, .. }, SweepParameter::Gamma) => *gamma = value,
        (SystemSpec::Reversed { inner }, _) => **inner = with_parameter(inner, parameter, value)?,
        _ => {
            return Err(Error::invalid(
                "parameter",
                format!("system has no parameter `{parameter}`"),
            ))
        }
    }
    Ok(s)
}

/// One row of the sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub nodes_per_index: Vec<usize>,
    /// Warning count, or the failure message.
    pub status: std::result::Result<usize, String>,
}

/// Summary table with columns `parameter_value, n_index0, ..., warnings`.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let width = rows
        .iter()
        .map(|r| r.nodes_per_index.len())
        .max()
        .unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["parameter_value".to_string()];
    header.extend((0..width).map(|k| format!("n_index{k}")));
    header.push("warnings".into());
    let csv_err = |e: csv::Error| Error::invalid("summary", e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![r.value.to_string()];
        rec.extend((0..width).map(|k| r.nodes_per_index.get(k).copied().unwrap_or(0).to_string()));
        rec.push(match &r.status {
            Ok(n) => n.to_string(),
            Err(msg) => format!("failed: {msg}"),
        });
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::invalid("summary", e.to_string()))
}

/// `sweep`: independent runs over parameter values, one subdirectory each
/// (`kappa-0.02`, ...), plus summary.csv.
pub fn cmd_sweep(
    config: &Path,
    out: &Path,
    parameter: SweepParameter,
    values: &[f64],
    threads: usize,
) -> i32 {
    if values.is_empty() {
        eprintln!("error: sweep needs at least one value");
        return EXIT_INVALID;
    }
    let base = match RunConfig::load(config) {
        Ok(c) => c,
        Err(e) => return report(&e, &config.display().to_string()),
    };
    let mut configs = Vec::with_capacity(values.len());
    for &v in values {
        let spec = match with_parameter(&base.system, parameter, v)
            .and_then(|s| s.validate().map(|_| s))
        {
            Ok(s) => s,
            Err(e) => return report(&e, &format!("{parameter} = {v}")),
        };
        configs.push(RunConfig {
            system: spec,
            ..base.clone()
        });
    }
    let mut rows = Vec::new();
    let mut failed = false;
    for (cfg, &v) in configs.iter().zip(values) {
        let dir = out.join(format!("{parameter}-{v}"));
        let command = format!("sweep --parameter {parameter} (value {v})");
        match run_config(cfg, config, &dir, threads, &command) {
            Ok(r) => {
                failed |= r.manifest.exit_code != EXIT_OK;
                println!(
                    "{parameter} = {v}: {:?} (by index)",
                    r.manifest.outcome.nodes_per_index
                );
                rows.push(SweepRow {
                    value: v,
                    nodes_per_index: r.manifest.outcome.nodes_per_index,
                    status: Ok(r.manifest.warnings.len()),
                });
            }
            Err(e) => {
                failed = true;
                eprintln!("error: {parameter} = {v}: {e}");
                rows.push(SweepRow {
                    value: v,
                    nodes_per_index: Vec::new(),
                    status: Err(e.to_string()),
                });
            }
        }
    }
    let written = sweep_csv(&rows).and_then(|b| Ok(write_atomic(&out.join("summary.csv"), &b)?));
    if let Err(e) = written {
        return report(&e, "summary.csv");
    }
    if failed {
        EXIT_FAILED
    } else {
        EXIT_OK
    }
}

/// Text form of a residual; exact zeros print as `0`.
pub fn format_residual(r: f64) -> String {
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r:.3e}")
    }
}

/// Writes the stationarity and index report for `state` to `w`.
pub fn inspect_state(
    system: &dyn DynamicalSystem,
    state: &StateVector,
    cfg: &SearchConfig,
    w: &mut dyn Write,
) -> Result<()> {
    let r = residual(system, &state.values);
    if r > cfg.residual_tol {
        writeln!(w, "residual {}", format_residual(r))?;
        return Err(Error::NotStationary {
            residual: r,
            tol: cfg.residual_tol,
        });
    }
    let rep = measure_index(system, state, 2, cfg, None)?;
    writeln!(
        w,
        "index {}, residual {}, zero-count {}",
        rep.index,
        format_residual(r),
        rep.zero_count
    )?;
    let values: Vec<String> = rep
        .rayleigh_values
        .iter()
        .map(|v| format!("{v:.6}"))
        .collect();
    writeln!(w, "rayleigh values: {}", values.join(" "))?;
    if rep.possibly_truncated {
        writeln!(
            w,
            "note: every probed direction is unstable; the index may be larger"
        )?;
    }
    Ok(())
}

/// `inspect`: index report for a state file, or for a seed of the
/// configuration when `seed_label` is given.
pub fn cmd_inspect(
    config: &Path,
    state_file: Option<&Path>,
    seed_label: Option<&str>,
    w: &mut dyn Write,
) -> i32 {
    let mut run = || -> Result<()> {
        let cfg = RunConfig::load(config)?;
        let base = config.parent().unwrap_or(Path::new("."));
        let system = make_system(&cfg.system)?;
        let search = SearchConfig::resolve(&cfg.system, cfg.search.as_ref())?;
        let state = match (state_file, seed_label) {
            (Some(f), None) => read_state(system.as_ref(), f)?,
            (None, Some(label)) => {
                let spec = cfg
                    .seeds
                    .iter()
                    .find(|s| s.name == label)
                    .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
                seed_state(system.as_ref(), spec, base)?
            }
            _ => {
                return Err(Error::invalid(
                    "inspect",
                    "give exactly one of --state and --seed-label",
                ))
            }
        };
        inspect_state(system.as_ref(), &state, &search, w)
    };
    match run() {
        Ok(()) => EXIT_OK,
        Err(e) => report(&e, "inspect"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportKind {
    Json,
    Dot,
    /// One node's state as little-endian `f64`.
    F64,
    /// One node's state as a PGM image (grid systems only).
    Pgm,
}

/// `export`: re-renders a landscape.json, or dumps one node's state.
pub fn cmd_export(input: &Path, out: &Path, kind: ExportKind, seed_label: Option<&str>) -> i32 {
    let run = || -> Result<()> {
        let graph = import_json(&fs::read(input)?, input.parent())?;
        let bytes = match kind {
            ExportKind::Json => export_graph(&graph, ExportFormat::Json),
            ExportKind::Dot => export_graph(&graph, ExportFormat::Dot),
            ExportKind::F64 | ExportKind::Pgm => {
                let label = seed_label
                    .ok_or_else(|| Error::invalid("seed-label", "required for state exports"))?;
                let node = graph.node_or_err(label)?;
                if kind == ExportKind::F64 {
                    state_to_bytes(&node.state)
                } else {
                    pgm_bytes(&node.state)?
                }
            }
        };
        write_atomic(out, &bytes)?;
        if kind == ExportKind::Json {
            let external = |n: &&Node| n.state.grid.is_some() && n.state.dim() > INLINE_LIMIT;
            for node in graph.nodes.iter().filter(external) {
                let dest = out
                    .parent()
                    .unwrap_or(Path::new("."))
                    .join(field_file_name(&node.label));
                write_atomic(&dest, &state_to_bytes(&node.state))?;
            }
        }
        Ok(())
    };
    match run() {
        Ok(()) => EXIT_OK,
        Err(e) => report(&e, &input.display().to_string()),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "saddlescape",
    version,
    about = "Saddle search and solution landscapes"
)]
pub struct Cli {
    /// Worker threads for the per-direction searches.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build one landscape.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run a configuration over parameter values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        parameter: SweepParameter,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
    /// Report residual, index, zero-count and Rayleigh values of a state.
    Inspect {
        /// Configuration providing the system and search settings.
        #[arg(long)]
        config: PathBuf,
        /// State file: little-endian f64 dump or JSON array.
        #[arg(long, conflicts_with = "seed_label")]
        state: Option<PathBuf>,
        /// Inspect this seed of the configuration instead.
        #[arg(long)]
        seed_label: Option<String>,
    },
    /// Re-render a landscape.json or dump one node's state.
    Export {
        /// A landscape.json written by `run`.
        #[arg(long, visible_alias = "input")]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportKind::Dot)]
        format: ExportKind,
        /// Node label, for the f64 and pgm formats.
        #[arg(long)]
        seed_label: Option<String>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    match &cli.command {
        Command::Run { config, out } => cmd_run(config, out, cli.threads),
        Command::Sweep {
            config,
            out,
            parameter,
            values,
        } => cmd_sweep(config, out, *parameter, values, cli.threads),
        Command::Inspect {
            config,
            state,
            seed_label,
        } => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            cmd_inspect(config, state.as_deref(), seed_label.as_deref(), &mut lock)
        }
        Command::Export {
            config,
            out,
            format,
            seed_label,
        } => cmd_export(config, out, *format, seed_label.as_deref()),
    }
}
