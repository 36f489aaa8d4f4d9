//! The `stit` command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{
    analytic_tables, p_lr, sample_summary, write_table_csv, QuadratureConfig, SeriesConfig,
};
use crate::combinatorics::{analyze, estimate_statistics, VertexKind};
use crate::engine::{calibrate_time, run_replicates, ConstructionResult, DEFAULT_CELL_CAP};
use crate::error::{AnalyticError, EngineError, EstimateError, GeomError};
use crate::geom::make_window;
use crate::plane_measure::DirectionPreset;
use crate::verify::{verify, z_score, Z_LIMIT};

/// Version tag of the CSV and JSON schemas written by the CLI.
pub const SCHEMA_VERSION: u32 = 1;

pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const ANALYTIC: u8 = 2;
    pub const CAP: u8 = 3;
    pub const VERIFICATION: u8 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "stit", version, about = "Spatial STIT tessellations: simulation, analytic tables and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evaluate every analytic probability and mean value.
    Tables,
    /// Run seeded constructions and persist them.
    Simulate,
    /// Simulate, estimate and compare with the analytic values.
    Compare,
    /// Draw typical I-segments directly and compare with quadrature.
    SampleSegment,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Tables => "tables",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
            Command::SampleSegment => "sample-segment",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by all commands; unset flags fall back to the TOML file,
/// then to defaults.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Options {
    /// TOML file with any of these options; flags win.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub window_side: Option<f64>,
    /// Time threshold of the construction.
    #[arg(long, global = true, conflicts_with = "target_cells")]
    pub time: Option<f64>,
    /// Calibrate the time threshold to this mean cell count.
    #[arg(long, global = true)]
    pub target_cells: Option<usize>,
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    /// Reduced-window margin as a fraction of the window side.
    #[arg(long, global = true)]
    pub margin: Option<f64>,
    /// isotropic or aniso-z2.
    #[arg(long, global = true)]
    pub direction_dist: Option<DirectionPreset>,
    #[arg(long, global = true)]
    pub series_terms: Option<usize>,
    #[arg(long, global = true)]
    pub quad_abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub quad_rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub cell_cap: Option<usize>,
    /// Draws for sample-segment.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the polygons of the first replicate as OBJ.
    #[arg(long, global = true)]
    pub export_obj: Option<PathBuf>,
    /// Worker threads; defaults to the machine parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

impl Options {
    /// Fills unset fields from `other`.
    fn or(self, other: Options) -> Options {
        Options {
            config: self.config.or(other.config),
            seed: self.seed.or(other.seed),
            window_side: self.window_side.or(other.window_side),
            time: self.time.or(if self.target_cells.is_some() { None } else { other.time }),
            target_cells: self.target_cells.or(if self.time.is_some() { None } else { other.target_cells }),
            replicates: self.replicates.or(other.replicates),
            margin: self.margin.or(other.margin),
            direction_dist: self.direction_dist.or(other.direction_dist),
            series_terms: self.series_terms.or(other.series_terms),
            quad_abs_tol: self.quad_abs_tol.or(other.quad_abs_tol),
            quad_rel_tol: self.quad_rel_tol.or(other.quad_rel_tol),
            cell_cap: self.cell_cap.or(other.cell_cap),
            samples: self.samples.or(other.samples),
            out: self.out.or(other.out),
            format: self.format.or(other.format),
            export_obj: self.export_obj.or(other.export_obj),
            threads: self.threads.or(other.threads),
        }
    }
}

/// How long a simulation runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Duration {
    Time(f64),
    TargetCells(usize),
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub window_side: f64,
    pub duration: Duration,
    pub replicates: usize,
    pub margin: f64,
    pub direction_dist: DirectionPreset,
    pub series: SeriesConfig,
    pub quad: QuadratureConfig,
    pub cell_cap: usize,
    pub samples: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub export_obj: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_MARGIN: f64 = 0.15;
pub const DEFAULT_TIME: f64 = 45.0;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_COMPARE_REPLICATES: usize = 50;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Analytic(_) => exit::ANALYTIC,
            CliError::Engine(EngineError::CellCapExceeded { .. }) => exit::CAP,
            _ => exit::USAGE,
        }
    }
}

impl RunConfig {
    pub fn resolve(command: Command, flags: Options) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                toml::from_str::<Options>(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => Options::default(),
        };
        let o = flags.or(file);
        let duration = match (o.time, o.target_cells) {
            (Some(_), Some(_)) => return Err(CliError::Config("set only one of time and target-cells".into())),
            (Some(t), None) => Duration::Time(t),
            (None, Some(n)) => Duration::TargetCells(n),
            (None, None) => Duration::Time(DEFAULT_TIME),
        };
        if let Duration::Time(t) = duration {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("time {t} must be finite and non-negative")));
            }
        }
        let default_replicates = if command == Command::Compare { DEFAULT_COMPARE_REPLICATES } else { 1 };
        let replicates = o.replicates.unwrap_or(default_replicates);
        if replicates == 0 {
            return Err(CliError::Config("replicates must be at least 1".into()));
        }
        let window_side = o.window_side.unwrap_or(1.0);
        if !(window_side > 0.0 && window_side.is_finite()) {
            return Err(CliError::Config(format!("window side {window_side} must be positive")));
        }
        let defaults = QuadratureConfig::default();
        let quad = QuadratureConfig {
            abs_tol: o.quad_abs_tol.unwrap_or(defaults.abs_tol),
            rel_tol: o.quad_rel_tol.unwrap_or(defaults.rel_tol),
            ..defaults
        };
        quad.validate()?;
        let series = SeriesConfig {
            n_max: o.series_terms.unwrap_or(SeriesConfig::default().n_max),
            tail_report: true,
        };
        series.validate()?;
        Ok(RunConfig {
            command: command.name().to_string(),
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            window_side,
            duration,
            replicates,
            margin: o.margin.unwrap_or(DEFAULT_MARGIN),
            direction_dist: o.direction_dist.unwrap_or(DirectionPreset::Isotropic),
            series,
            quad,
            cell_cap: o.cell_cap.unwrap_or(DEFAULT_CELL_CAP),
            samples: o.samples.unwrap_or(DEFAULT_SAMPLES),
            out: o.out,
            format: o.format.unwrap_or(Format::Csv),
            export_obj: o.export_obj,
            threads: o.threads,
        })
    }

    /// `key: value` pairs written at the top of every output file.
    pub fn header(&self) -> Vec<(String, String)> {
        let mut h = vec![
            ("tool".to_string(), format!("stit {}", env!("CARGO_PKG_VERSION"))),
            ("schema".into(), SCHEMA_VERSION.to_string()),
            ("command".into(), self.command.clone()),
            ("seed".into(), self.seed.to_string()),
        ];
        match self.command.as_str() {
            "tables" => {}
            "sample-segment" => h.push(("samples".into(), self.samples.to_string())),
            _ => {
                h.push(("window_side".into(), self.window_side.to_string()));
                match self.duration {
                    Duration::Time(t) => h.push(("time".into(), t.to_string())),
                    Duration::TargetCells(n) => h.push(("target_cells".into(), n.to_string())),
                }
                h.push(("replicates".into(), self.replicates.to_string()));
                h.push(("margin".into(), self.margin.to_string()));
                h.push(("direction_dist".into(), self.direction_dist.to_string()));
                h.push(("cell_cap".into(), self.cell_cap.to_string()));
            }
        }
        if matches!(self.command.as_str(), "tables" | "compare" | "sample-segment") {
            h.push(("series_terms".into(), self.series.n_max.to_string()));
            h.push(("quad_abs_tol".into(), self.quad.abs_tol.to_string()));
            h.push(("quad_rel_tol".into(), self.quad.rel_tol.to_string()));
        }
        h
    }
}

/// Parses the process arguments, runs the command and maps the outcome to
/// an exit code.
/// Replicate count below which `compare` warns about weak statistics.
pub const RECOMMENDED_REPLICATES: usize = 50;

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::SUCCESS });
        }
    };
    ExitCode::from(run(cli))
}

pub fn run(cli: Cli) -> u8 {
    let config = match RunConfig::resolve(cli.command, cli.options) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Some(n) = config.threads {
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: thread pool already initialized: {e}");
        }
    }
    let outcome = match cli.command {
        Command::Tables => cmd_tables(&config),
        Command::Simulate => cmd_simulate(&config),
        Command::Compare => cmd_compare(&config),
        Command::SampleSegment => cmd_sample_segment(&config),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Opens the output file, or stdout when none is configured.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

#[derive(Serialize)]
struct JsonDocument<'a, T: Serialize> {
    header: std::collections::BTreeMap<String, String>,
    #[serde(flatten)]
    body: &'a T,
}

fn write_json<T: Serialize>(config: &RunConfig, body: &T, path: Option<&Path>) -> Result<(), CliError> {
    let doc = JsonDocument {
        header: config.header().into_iter().collect(),
        body,
    };
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_header<W: Write>(config: &RunConfig, w: &mut W) -> std::io::Result<()> {
    for (k, v) in config.header() {
        writeln!(w, "# {k}: {v}")?;
    }
    Ok(())
}

pub fn cmd_tables(config: &RunConfig) -> Result<u8, CliError> {
    let tables = analytic_tables(&config.series, &config.quad)?;
    for w in &tables.warnings {
        eprintln!("warning: {w}");
    }
    match config.format {
        Format::Csv => {
            let w = output(config.out.as_deref())?;
            write_table_csv(&tables.rows, &config.header(), w)?;
        }
        Format::Json => write_json(config, &tables, config.out.as_deref())?,
    }
    Ok(exit::SUCCESS)
}

/// Resolves the time threshold, calibrating it when a cell count is given.
fn resolve_time(config: &RunConfig) -> Result<f64, CliError> {
    let window = make_window(config.window_side)?;
    let d = config.direction_dist.build()?;
    Ok(match config.duration {
        Duration::Time(t) => t,
        Duration::TargetCells(n) => {
            let t = calibrate_time(&window, &d, n, config.seed, config.cell_cap)?;
            eprintln!("calibrated time {t:.6} for about {n} cells");
            t
        }
    })
}

fn run_all(config: &RunConfig, t: f64) -> Result<Vec<ConstructionResult>, CliError> {
    let window = make_window(config.window_side)?;
    let d = config.direction_dist.build()?;
    Ok(run_replicates(&window, &d, t, config.seed, config.replicates, config.cell_cap)?)
}

fn export_obj(config: &RunConfig, first: &ConstructionResult) -> Result<(), CliError> {
    if let Some(path) = &config.export_obj {
        let mut w = BufWriter::new(File::create(path)?);
        write_header(config, &mut w)?;
        first.write_obj(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

/// Per-replicate summary printed by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub replicate: u64,
    pub cells: usize,
    pub polygons: usize,
    pub vertices_t: usize,
    pub vertices_x: usize,
    pub vertices_boundary: usize,
}

pub fn summarize(r: &ConstructionResult) -> Result<ReplicateSummary, CliError> {
    let comb = analyze(r).map_err(EstimateError::from)?;
    let count = |k: VertexKind| comb.vertices.iter().filter(|v| v.kind == k).count();
    Ok(ReplicateSummary {
        replicate: r.replicate,
        cells: r.final_cells.len(),
        polygons: r.polygons.len(),
        vertices_t: count(VertexKind::T),
        vertices_x: count(VertexKind::X),
        vertices_boundary: count(VertexKind::Boundary),
    })
}

/// Path of replicate `r` when several are written: `run.json` becomes
/// `run_r3.json`.
pub fn replicate_path(base: &Path, r: u64, count: usize) -> PathBuf {
    if count == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = base.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    base.with_file_name(format!("{stem}_r{r}{ext}"))
}

/// A persisted construction with the configuration that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationDocument {
    pub header: std::collections::BTreeMap<String, String>,
    pub construction: ConstructionResult,
}

impl SimulationDocument {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let doc: SimulationDocument = serde_json::from_str(&text)?;
        // re-validates format and version
        let construction = ConstructionResult::from_json(&doc.construction.to_json()?)?;
        Ok(Self { construction, ..doc })
    }
}

pub fn cmd_simulate(config: &RunConfig) -> Result<u8, CliError> {
    let t = resolve_time(config)?;
    let results = run_all(config, t)?;
    if let Some(first) = results.first() {
        export_obj(config, first)?;
    }
    let mut header: std::collections::BTreeMap<String, String> = config.header().into_iter().collect();
    header.insert("resolved_time".into(), t.to_string());
    let mut cells = 0usize;
    for r in &results {
        let s = summarize(r)?;
        cells += s.cells;
        println!(
            "replicate {}: {} cells, {} polygons, vertices T {} X {} boundary {}",
            s.replicate, s.cells, s.polygons, s.vertices_t, s.vertices_x, s.vertices_boundary
        );
        if let Some(base) = &config.out {
            let doc = SimulationDocument {
                header: header.clone(),
                construction: r.clone(),
            };
            let mut w = BufWriter::new(File::create(replicate_path(base, r.replicate, results.len()))?);
            serde_json::to_writer(&mut w, &doc)?;
            w.flush()?;
        }
    }
    println!(
        "time {t}: mean {:.1} cells over {} replicates",
        cells as f64 / results.len() as f64,
        results.len()
    );
    Ok(exit::SUCCESS)
}

pub fn cmd_compare(config: &RunConfig) -> Result<u8, CliError> {
    let tables = analytic_tables(&config.series, &config.quad)?;
    let t = resolve_time(config)?;
    if config.replicates < 2 {
        return Err(CliError::Config("compare needs at least 2 replicates".into()));
    }
    if config.replicates < RECOMMENDED_REPLICATES {
        eprintln!(
            "warning: {} replicates; at least {RECOMMENDED_REPLICATES} are recommended for the comparison",
            config.replicates
        );
    }
    let results = run_all(config, t)?;
    if let Some(first) = results.first() {
        export_obj(config, first)?;
    }
    let estimates = estimate_statistics(&results, config.margin)?;
    let report = verify(&tables, &estimates, results.len());
    let mean_cells = results.iter().map(|r| r.final_cells.len()).sum::<usize>() as f64 / results.len() as f64;
    eprintln!("time {t}, mean {mean_cells:.1} cells");
    eprint!("{}", report.summary());
    match config.format {
        Format::Csv => {
            let mut w = output(config.out.as_deref())?;
            write_header(config, &mut w)?;
            writeln!(w, "# resolved_time: {t}")?;
            report.write_csv(w)?;
        }
        Format::Json => write_json(config, &report, config.out.as_deref())?,
    }
    Ok(if report.all_pass() { exit::SUCCESS } else { exit::VERIFICATION })
}

/// One empirical-versus-quadrature row of `sample-segment`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub quantity: String,
    pub empirical: f64,
    pub se: f64,
    pub analytic: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub rows: Vec<SampleRow>,
    pub mean_length: f64,
    pub mean_birth: f64,
}

/// Largest T count and left/right count compared by `sample-segment`.
pub const SAMPLE_MAX_T: usize = 5;
pub const SAMPLE_MAX_LR: usize = 3;

pub fn sample_report(config: &RunConfig) -> Result<SampleReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let t = match config.duration {
        Duration::Time(t) if t > 0.0 => t,
        _ => 1.0,
    };
    let s = sample_summary(t, config.samples, SAMPLE_MAX_T, SAMPLE_MAX_LR, &mut rng)?;
    let q = &config.quad;
    let mut rows = Vec::new();
    let mut push = |quantity: String, (empirical, se): (f64, f64), analytic: f64| {
        rows.push(SampleRow {
            z: z_score(empirical, se, analytic),
            quantity,
            empirical,
            se,
            analytic,
        });
    };
    for m in 0..=SAMPLE_MAX_T as u32 {
        let mut exact = 0.0;
        for l in 0..=m {
            exact += p_lr(l, m - l, q)?.value;
        }
        push(format!("P(nu_T={m})"), s.proportion(s.t_counts[m as usize]), exact);
    }
    for l in 0..=SAMPLE_MAX_LR {
        for r in 0..=SAMPLE_MAX_LR {
            push(
                format!("P(nu_L={l},nu_R={r})"),
                s.proportion(s.lr_counts[l][r]),
                p_lr(l as u32, r as u32, q)?.value,
            );
        }
    }
    push("p_L|T".into(), s.left_fraction(), 0.5);
    push("mean nu_T".into(), s.mean_t_count(), 1.0);
    Ok(SampleReport {
        rows,
        mean_length: s.length_sum / s.draws as f64,
        mean_birth: s.birth_sum / s.draws as f64,
    })
}

pub fn cmd_sample_segment(config: &RunConfig) -> Result<u8, CliError> {
    let report = sample_report(config)?;
    for r in &report.rows {
        eprintln!(
            "{:<20} {:>10.6} +- {:.6}  analytic {:.6}  z {:>6.2}",
            r.quantity, r.empirical, r.se, r.analytic, r.z
        );
    }
    match config.format {
        Format::Csv => {
            let mut w = output(config.out.as_deref())?;
            write_header(config, &mut w)?;
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["quantity", "empirical", "se", "analytic", "z"])?;
            for r in &report.rows {
                csv.write_record([
                    r.quantity.clone(),
                    r.empirical.to_string(),
                    r.se.to_string(),
                    r.analytic.to_string(),
                    r.z.to_string(),
                ])?;
            }
            csv.flush()?;
        }
        Format::Json => write_json(config, &report, config.out.as_deref())?,
    }
    let ok = report.rows.iter().all(|r| r.z.abs() < Z_LIMIT);
    Ok(if ok { exit::SUCCESS } else { exit::VERIFICATION })
}
