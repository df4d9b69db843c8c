//! Command-line front end: `evaluate`, `fingerprint` and `report`.
//!
//! Outputs are written to a staging directory inside `--out` and moved into
//! place only after every file succeeded. The merged configuration is
//! written next to the outputs as `effective_config.toml`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use thiserror::Error;

use crate::config::EvaluationConfig;
use crate::fingerprint::{threshold_circle_for, AxisLayout, Fingerprint};
use crate::framework::{Evaluator, SceneEvaluation};
use crate::metrics::standard_registry;
use crate::report::{classification_report, scene_reports, write_summary_csv, SceneReport};
use crate::safety_potential::scene_claimed_sets;
use crate::scene::Scenario;
use crate::svg;
use crate::tracks_csv::parse_tracks;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Config(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "traffic-fingerprint", version, about = "Scene criticality metrics and Kiviat fingerprints for recorded traffic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate all metrics and write per-scene JSON reports and a CSV summary.
    Evaluate(CommonArgs),
    /// Render fingerprint radar charts as SVG.
    Fingerprint {
        #[command(flatten)]
        common: CommonArgs,
        /// Scene times (s) drawn together in one chart, at most 3.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        overlay: Vec<f64>,
    },
    /// Score SP and the TQ area against TTC/PET ground truth.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        /// Ground-truth metrics, e.g. `TTC,PET`.
        #[arg(long, value_delimiter = ',')]
        ground_truth: Vec<String>,
        /// Ground-truth threshold in seconds.
        #[arg(long)]
        threshold: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Track CSV file(s).
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// Column schema name (built-in `interaction`, `ind`, or defined in the config).
    #[arg(long)]
    pub schema: Option<String>,
    /// Single scene time in seconds.
    #[arg(long, conflicts_with_all = ["from", "to", "all"])]
    pub time: Option<f64>,
    /// Start of a time range (s).
    #[arg(long, conflicts_with = "all")]
    pub from: Option<f64>,
    /// End of a time range (s).
    #[arg(long, conflicts_with = "all")]
    pub to: Option<f64>,
    /// Every recorded frame (default when no time is given).
    #[arg(long)]
    pub all: bool,
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Output formats: json, csv, svg.
    #[arg(long, value_delimiter = ',')]
    pub formats: Vec<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also write the claimed sets of every scene as JSON.
    #[arg(long)]
    pub dump_claimed_sets: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Selection {
    All,
    Time(f64),
    Range(Option<f64>, Option<f64>),
}

impl CommonArgs {
    fn selection(&self) -> Selection {
        match (self.time, self.from, self.to) {
            (Some(t), _, _) => Selection::Time(t),
            (None, None, None) => Selection::All,
            (None, from, to) => Selection::Range(from, to),
        }
    }

    fn load_config(&self) -> Result<EvaluationConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => EvaluationConfig::load(path).map_err(|e| CliError::Config(e.to_string()))?,
            None => EvaluationConfig::default(),
        };
        if let Some(s) = &self.schema {
            cfg.run.schema = s.clone();
        }
        if !self.formats.is_empty() {
            cfg.run.formats = self.formats.clone();
        }
        if let Some(w) = self.workers {
            cfg.run.workers = w;
        }
        Ok(cfg)
    }
}

fn select_times(scenario: &Scenario, selection: Selection) -> Result<Vec<f64>, CliError> {
    match selection {
        Selection::All => Ok(scenario.frame_times()),
        Selection::Time(t) => scenario.snap_time(t).map(|t| vec![t]).map_err(|e| CliError::Input(e.to_string())),
        Selection::Range(from, to) => {
            let eps = scenario.dt() * 1e-6;
            let lo = from.unwrap_or(f64::NEG_INFINITY) - eps;
            let hi = to.unwrap_or(f64::INFINITY) + eps;
            Ok(scenario.frame_times().into_iter().filter(|t| (lo..=hi).contains(t)).collect())
        }
    }
}

fn load_scenario(path: &Path, cfg: &EvaluationConfig) -> Result<Scenario, CliError> {
    let schema = cfg.schema().map_err(|e| CliError::Config(e.to_string()))?;
    let file = fs::File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_tracks(std::io::BufReader::new(file), &schema).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn scene_stem(t: f64) -> String {
    format!("scene_{t:010.3}")
}

/// Output staging: files go to a hidden directory that is renamed into
/// place on success and removed on failure.
struct Staging {
    dir: PathBuf,
    out: PathBuf,
    committed: bool,
}

impl Staging {
    fn new(out: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(out).map_err(internal)?;
        let dir = out.join(format!(".staging-{}", std::process::id()));
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(internal)?;
        }
        fs::create_dir_all(&dir).map_err(internal)?;
        Ok(Self { dir, out: out.to_path_buf(), committed: false })
    }

    fn write(&self, rel: impl AsRef<Path>, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(internal)?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
    }

    fn commit(mut self) -> Result<(), CliError> {
        move_tree(&self.dir, &self.out).map_err(internal)?;
        fs::remove_dir_all(&self.dir).map_err(internal)?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.dir);
        }
    }
}

fn move_tree(from: &Path, to: &Path) -> std::io::Result<()> {
    for entry in fs::read_dir(from)? {
        let entry = entry?;
        let target = to.join(entry.file_name());
        if entry.file_type()?.is_dir() {
            fs::create_dir_all(&target)?;
            move_tree(&entry.path(), &target)?;
        } else {
            fs::rename(entry.path(), &target)?;
        }
    }
    Ok(())
}

/// One input evaluated and fingerprinted.
struct Batch {
    name: String,
    scenario: Scenario,
    evaluations: Vec<SceneEvaluation>,
}

fn evaluate_inputs(args: &CommonArgs, cfg: &EvaluationConfig) -> Result<Vec<Batch>, CliError> {
    let registry = standard_registry(cfg);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.run.workers).build().map_err(internal)?;
    let multi = args.input.len() > 1;
    let mut batches = Vec::new();
    for path in &args.input {
        let scenario = load_scenario(path, cfg)?;
        let times = select_times(&scenario, args.selection())?;
        if times.is_empty() {
            warn!("{}: no scenes selected", path.display());
        }
        info!("{}: evaluating {} scenes", path.display(), times.len());
        let evaluations = pool.install(|| {
            Evaluator::new(&scenario, &registry, cfg).evaluate_many(&times).map_err(|e| CliError::Input(e.to_string()))
        })?;
        let name = if multi {
            path.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned())
        } else {
            String::new()
        };
        batches.push(Batch { name, scenario, evaluations });
    }
    Ok(batches)
}

fn fingerprint_batch(batch: &Batch, cfg: &EvaluationConfig) -> Result<(Vec<(Fingerprint, SceneReport)>, crate::fingerprint::ThresholdCircle), CliError> {
    let registry = standard_registry(cfg);
    let layout = AxisLayout::from_registry(&registry, &cfg.fingerprint.axis_order).map_err(|e| CliError::Config(e.to_string()))?;
    let circle = threshold_circle_for(&registry, &layout, cfg);
    Ok((scene_reports(&batch.evaluations, &layout, &circle, cfg), circle))
}

fn prepare(args: &CommonArgs, cfg: &EvaluationConfig) -> Result<Staging, CliError> {
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let staging = Staging::new(&args.out)?;
    staging.write("effective_config.toml", cfg.to_toml_string())?;
    Ok(staging)
}

fn cmd_evaluate(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = args.load_config()?;
    let staging = prepare(args, &cfg)?;
    let has = |f: &str| cfg.run.formats.iter().any(|x| x == f);
    for batch in evaluate_inputs(args, &cfg)? {
        let dir = PathBuf::from(&batch.name);
        let (reports, circle) = fingerprint_batch(&batch, &cfg)?;
        for (fp, report) in &reports {
            let stem = scene_stem(report.t);
            if has("json") {
                staging.write(dir.join(format!("{stem}.json")), report.to_json())?;
            }
            if has("svg") {
                staging.write(dir.join(format!("{stem}.svg")), svg::render(fp, Some(&circle)))?;
            }
        }
        if has("csv") {
            let mut buf = Vec::new();
            let rows: Vec<SceneReport> = reports.into_iter().map(|(_, r)| r).collect();
            write_summary_csv(&rows, &mut buf).map_err(internal)?;
            staging.write(dir.join("summary.csv"), buf)?;
        }
        if args.dump_claimed_sets {
            for e in &batch.evaluations {
                let scene = batch.scenario.scene_at(e.t).map_err(internal)?;
                let scene = if cfg.scene.include_vrus { scene } else { scene.vehicles_only() };
                let sets = scene_claimed_sets(&scene, &batch.scenario, &cfg.safety);
                let json = serde_json::to_string_pretty(&sets).map_err(internal)?;
                staging.write(dir.join(format!("{}_claimed.json", scene_stem(e.t))), json)?;
            }
        }
    }
    staging.commit()
}

fn cmd_fingerprint(args: &CommonArgs, overlay: &[f64]) -> Result<(), CliError> {
    let cfg = args.load_config()?;
    if overlay.len() > svg::MAX_OVERLAY {
        return Err(CliError::Config(format!("--overlay takes at most {} scene times", svg::MAX_OVERLAY)));
    }
    let staging = prepare(args, &cfg)?;
    for batch in evaluate_inputs(args, &cfg)? {
        let dir = PathBuf::from(&batch.name);
        let (reports, circle) = fingerprint_batch(&batch, &cfg)?;
        if overlay.is_empty() {
            for (fp, _) in &reports {
                staging.write(dir.join(format!("{}.svg", scene_stem(fp.t))), svg::render(fp, Some(&circle)))?;
            }
            continue;
        }
        let mut chosen = Vec::new();
        for &t in overlay {
            let t = batch.scenario.snap_time(t).map_err(|e| CliError::Input(e.to_string()))?;
            match reports.iter().find(|(fp, _)| fp.t == t) {
                Some((fp, _)) => chosen.push(fp),
                None => return Err(CliError::Input(format!("overlay time {t} is not among the selected scenes"))),
            }
        }
        staging.write(dir.join("overlay.svg"), svg::render_overlay(&chosen, Some(&circle), "scene comparison"))?;
    }
    staging.commit()
}

fn cmd_report(args: &CommonArgs, ground_truth: &[String], threshold: Option<f64>) -> Result<(), CliError> {
    let mut cfg = args.load_config()?;
    if !ground_truth.is_empty() {
        cfg.fingerprint.ground_truth = ground_truth.to_vec();
    }
    if let Some(t) = threshold {
        cfg.fingerprint.ground_truth_threshold = t;
    }
    if !(cfg.fingerprint.ground_truth_threshold >= 0.0) {
        return Err(CliError::Config("--threshold must be >= 0".into()));
    }
    let staging = prepare(args, &cfg)?;
    for batch in evaluate_inputs(args, &cfg)? {
        let dir = PathBuf::from(&batch.name);
        if batch.evaluations.is_empty() {
            warn!("no scenes to classify");
            continue;
        }
        let (reports, circle) = fingerprint_batch(&batch, &cfg)?;
        let fps: Vec<Fingerprint> = reports.into_iter().map(|(f, _)| f).collect();
        let report = classification_report(&batch.evaluations, &fps, &circle, &cfg).map_err(internal)?;
        print!("{}", report.to_text());
        staging.write(dir.join("classification.txt"), report.to_text())?;
        staging.write(dir.join("classification.json"), report.to_json())?;
    }
    staging.commit()
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Fingerprint { common, overlay } => cmd_fingerprint(common, overlay),
        Command::Report { common, ground_truth, threshold } => cmd_report(common, ground_truth, *threshold),
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
