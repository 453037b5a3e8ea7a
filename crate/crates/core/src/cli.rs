//! Command line front end: config assembly, dispatch, CSV and manifest output.

use crate::config::{
    apply_override, canonical_toml, config_from_table, parse_table, schema_text, ConfigError,
    TABLE1_TOML,
};
use crate::experiments::{
    calibrate, run_roc, sweep_k, validate_channel, validate_poisson, write_calibration_csv,
    write_channel_csv, write_poisson_csv, write_roc_csv, ExperimentConfig, ExperimentError,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;
use toml::{Table, Value};

/// Default output directory when `--out` is absent.
pub const OUT_ENV: &str = "MCDETECT_OUT";
pub const MANIFEST: &str = "manifest.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    ValidateChannel,
    ValidatePoisson,
    Roc,
    SweepK,
    Calibrate,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::ValidateChannel => "validate-channel",
            Experiment::ValidatePoisson => "validate-poisson",
            Experiment::Roc => "roc",
            Experiment::SweepK => "sweep-k",
            Experiment::Calibrate => "calibrate",
        }
    }

    pub fn output(self) -> &'static str {
        match self {
            Experiment::ValidateChannel => "channel_validation.csv",
            Experiment::ValidatePoisson => "poisson_validation.csv",
            Experiment::Roc => "roc.csv",
            Experiment::SweepK => "sweep_k.csv",
            Experiment::Calibrate => "calibration.csv",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Experiment as ValueEnum>::from_str(s, false).map_err(|_| {
            let names: Vec<_> = Experiment::value_variants()
                .iter()
                .map(|e| e.name())
                .collect();
            format!(
                "unknown experiment `{s}` (expected one of {})",
                names.join(", ")
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Bundled default file when `None`.
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    /// Overrides the file's `seed` (default 1).
    pub seed: Option<u64>,
    /// Rayon pool size; all cores when `None`. Outputs do not depend on it.
    pub workers: Option<usize>,
    pub overrides: Vec<String>,
}

impl RunConfig {
    pub fn new(experiment: Experiment, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            experiment,
            config: None,
            out: out.into(),
            seed: None,
            workers: None,
            overrides: Vec::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Experiment(_) => "experiment",
            RunError::Io(..) => "io",
            RunError::Pool(_) => "pool",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub exit_code: i32,
    pub manifest: PathBuf,
    pub outputs: Vec<PathBuf>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

/// The validated configuration a run would use.
pub fn effective_config(run: &RunConfig) -> Result<ExperimentConfig, RunError> {
    let text = match &run.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| RunError::Io(path.clone(), e))?,
        None => TABLE1_TOML.to_string(),
    };
    let mut table: Table = parse_table(&text)?;
    let mut problems = Vec::new();
    for o in &run.overrides {
        if let Err(e) = apply_override(&mut table, o) {
            problems.push(e);
        }
    }
    if let Some(seed) = run.seed {
        table.insert("seed".into(), Value::Integer(seed as i64));
    }
    match config_from_table(&table) {
        Ok(cfg) if problems.is_empty() => Ok(cfg),
        Ok(_) => Err(ConfigError(problems).into()),
        Err(ConfigError(more)) => {
            problems.extend(more);
            Err(ConfigError(problems).into())
        }
    }
}

pub fn config_hash(experiment: Experiment, cfg: &ExperimentConfig) -> String {
    let mut h = Sha256::new();
    h.update(experiment.name().as_bytes());
    h.update(b"\n");
    h.update(canonical_toml(cfg).as_bytes());
    hex::encode(h.finalize())
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    std::fs::write(path, bytes).map_err(|e| RunError::Io(path.to_path_buf(), e))
}

/// CSV bytes and warnings.
fn dispatch(
    experiment: Experiment,
    cfg: &ExperimentConfig,
) -> Result<(Vec<u8>, Vec<String>), RunError> {
    let mut buf = Vec::new();
    let io = |e| RunError::Io(PathBuf::from(experiment.output()), e);
    let warnings = match experiment {
        Experiment::ValidateChannel => {
            write_channel_csv(&mut buf, &validate_channel(cfg)?).map_err(io)?;
            Vec::new()
        }
        Experiment::ValidatePoisson => {
            write_poisson_csv(&mut buf, &validate_poisson(cfg)?).map_err(io)?;
            Vec::new()
        }
        Experiment::Roc => {
            let r = run_roc(cfg)?;
            write_roc_csv(&mut buf, &r.points).map_err(io)?;
            r.warnings
        }
        Experiment::SweepK => {
            let r = sweep_k(cfg, &cfg.sweep_k)?;
            write_roc_csv(&mut buf, &r.points).map_err(io)?;
            r.warnings
        }
        Experiment::Calibrate => {
            let rows = calibrate(cfg)?;
            write_calibration_csv(&mut buf, &rows).map_err(io)?;
            rows.iter()
                .filter_map(|r| {
                    r.calibration
                        .warning
                        .as_ref()
                        .map(|w| format!("{} mu={:e}: {w}", r.detector.name(), r.mu))
                })
                .collect()
        }
    };
    Ok((buf, warnings))
}

fn execute(run: &RunConfig, manifest: &mut Table) -> Result<(Vec<PathBuf>, Vec<String>), RunError> {
    let cfg = effective_config(run)?;
    manifest.insert("seed".into(), Value::Integer(cfg.seed as i64));
    manifest.insert(
        "config_sha256".into(),
        Value::String(config_hash(run.experiment, &cfg)),
    );
    let effective = run.out.join("effective_config.toml");
    write(&effective, canonical_toml(&cfg).as_bytes())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = run.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| RunError::Pool(e.to_string()))?;
    manifest.insert(
        "workers".into(),
        Value::Integer(pool.current_num_threads() as i64),
    );
    let (csv, warnings) = pool.install(|| dispatch(run.experiment, &cfg))?;
    let path = run.out.join(run.experiment.output());
    write(&path, &csv)?;
    Ok((vec![effective, path], warnings))
}

fn strings<T: ToString>(items: impl IntoIterator<Item = T>) -> Value {
    Value::Array(
        items
            .into_iter()
            .map(|s| Value::String(s.to_string()))
            .collect(),
    )
}

/// Runs one experiment and always writes `manifest.toml` into the output
/// directory, recording either the outputs or the error.
pub fn run(run: &RunConfig) -> Result<RunReport, RunError> {
    std::fs::create_dir_all(&run.out).map_err(|e| RunError::Io(run.out.clone(), e))?;
    let start = Instant::now();
    let mut manifest = Table::new();
    manifest.insert(
        "experiment".into(),
        Value::String(run.experiment.name().into()),
    );
    manifest.insert(
        "package_version".into(),
        Value::String(env!("CARGO_PKG_VERSION").into()),
    );
    let result = execute(run, &mut manifest);
    manifest.insert(
        "wall_time_s".into(),
        Value::Float(start.elapsed().as_secs_f64()),
    );
    let report = match result {
        Ok((outputs, warnings)) => {
            manifest.insert("status".into(), Value::String("ok".into()));
            manifest.insert(
                "outputs".into(),
                strings(
                    outputs
                        .iter()
                        .map(|p| p.file_name().unwrap().to_string_lossy()),
                ),
            );
            manifest.insert("warnings".into(), strings(&warnings));
            RunReport {
                exit_code: 0,
                manifest: run.out.join(MANIFEST),
                outputs,
                warnings,
                error: None,
            }
        }
        Err(e) => {
            let mut record = Table::new();
            record.insert("kind".into(), Value::String(e.kind().into()));
            let messages = match &e {
                RunError::Config(ConfigError(list)) => list.clone(),
                other => vec![other.to_string()],
            };
            record.insert("messages".into(), strings(&messages));
            manifest.insert("status".into(), Value::String("error".into()));
            manifest.insert("error".into(), Value::Table(record));
            RunReport {
                exit_code: 1,
                manifest: run.out.join(MANIFEST),
                outputs: Vec::new(),
                warnings: Vec::new(),
                error: Some(e.to_string()),
            }
        }
    };
    let text = toml::to_string(&manifest).expect("plain table serializes");
    write(&report.manifest, text.as_bytes())?;
    Ok(report)
}

#[derive(Debug, Parser)]
#[command(
    name = "molcom-detect",
    version,
    about = "Distributed detection of a molecule-secreting target"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Particle simulator mean against the analytical channel mean.
    ValidateChannel(RunArgs),
    /// Simulated count histogram against the Poisson law.
    ValidatePoisson(RunArgs),
    /// Missed detection against false alarm for GAD, G-LRT and G-LOD.
    Roc(RunArgs),
    /// Missed detection over nested sensor subsets.
    SweepK(RunArgs),
    /// Fusion thresholds from H0 trials.
    Calibrate(RunArgs),
    /// Print every configuration key with type, unit and default.
    Schema,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Parameter file (TOML). Defaults to the bundled parameter file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: $MCDETECT_OUT or ./out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// key=value, repeatable; value is parsed as TOML
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl RunArgs {
    pub fn into_run(self, experiment: Experiment) -> RunConfig {
        let out = self
            .out
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        RunConfig {
            experiment,
            config: self.config,
            out,
            seed: self.seed,
            workers: self.workers,
            overrides: self.overrides,
        }
    }
}

/// Entry point of the binary; returns the process exit code.
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
    let (experiment, args) = match cli.command {
        Command::Schema => {
            print!("{}", schema_text());
            return 0;
        }
        Command::ValidateChannel(a) => (Experiment::ValidateChannel, a),
        Command::ValidatePoisson(a) => (Experiment::ValidatePoisson, a),
        Command::Roc(a) => (Experiment::Roc, a),
        Command::SweepK(a) => (Experiment::SweepK, a),
        Command::Calibrate(a) => (Experiment::Calibrate, a),
    };
    match run(&args.into_run(experiment)) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            match &report.error {
                Some(e) => eprintln!("error: {e}\nsee {}", report.manifest.display()),
                None => eprintln!("wrote {}", report.manifest.display()),
            }
            report.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
