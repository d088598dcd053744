//! Scenario runner: reads a JSON scenario, runs one command against the
//! core library, writes CSV/JSON artifacts and a `run.json` manifest.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;
pub mod suites;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use config::ScenarioConfig;
pub use manifest::{CheckRecord, OutputRecord, RunManifest, Verdict};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("config is missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    #[error(transparent)]
    Core(#[from] conelab_core::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input, 1 for numerical failures surfacing as errors.
    pub fn exit_code(&self) -> i32 {
        use conelab_core::Error as E;
        match self {
            CliError::Core(
                E::Overflow { .. } | E::UndefinedFrequency(_) | E::DegenerateNormalization { .. },
            ) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    VerifyNi,
    VerifyDing,
    Curvature,
    Frequency,
    ThreeCircles,
    Spectrum,
    Existence,
    Classify,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::VerifyNi,
        Command::VerifyDing,
        Command::Curvature,
        Command::Frequency,
        Command::ThreeCircles,
        Command::Spectrum,
        Command::Existence,
        Command::Classify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyNi => "verify-ni",
            Command::VerifyDing => "verify-ding",
            Command::Curvature => "curvature",
            Command::Frequency => "frequency",
            Command::ThreeCircles => "three-circles",
            Command::Spectrum => "spectrum",
            Command::Existence => "existence",
            Command::Classify => "classify",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Output directory; takes precedence over `output.dir` in the config.
    pub out: Option<PathBuf>,
    pub grid_per_decade: Option<usize>,
    pub tol: Option<f64>,
    pub paper_factors: bool,
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            out: None,
            grid_per_decade: None,
            tol: None,
            paper_factors: false,
            seed: suites::DEFAULT_SEED,
        }
    }
}

/// `CONELAB_OUT` beats `--out`.
pub fn resolve_out(flag: Option<PathBuf>, env: Option<PathBuf>) -> Option<PathBuf> {
    env.filter(|p| !p.as_os_str().is_empty()).or(flag)
}

pub fn run_file(
    command: Command,
    config: &Path,
    options: &RunOptions,
) -> Result<RunManifest, CliError> {
    let text = fs::read_to_string(config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config.display())))?;
    run(command, &text, options)
}

/// Runs one command and writes its artifacts plus `run.json`.
pub fn run(
    command: Command,
    config_text: &str,
    options: &RunOptions,
) -> Result<RunManifest, CliError> {
    if options.tol.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
        return Err(CliError::Config("--tol must be positive".into()));
    }
    if options.grid_per_decade == Some(0) {
        return Err(CliError::Config(
            "--grid-per-decade must be positive".into(),
        ));
    }
    let (config, raw) = ScenarioConfig::parse(config_text)?;
    let out = options
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));
    fs::create_dir_all(&out)?;
    commands::execute(command, &config, config::config_digest(&raw), options, &out)
}
