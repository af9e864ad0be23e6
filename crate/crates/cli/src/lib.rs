//! Experiment runner behind the `anosov` binary: reads an
//! [`ExperimentConfig`], runs one scan and writes `summary.json` plus one CSV
//! per scan into the output directory.
//!
//! Exit codes: 0 for a positive verdict (or a completed construction or
//! profile), 1 for a refutation, 2 for an inconclusive run, 3 for usage and
//! configuration errors.

mod config;
mod report;

use std::path::{Path, PathBuf};

use anosov::words::Representation;
use serde::Serialize;
use thiserror::Error;

pub use config::{ConfigError, Construction, DeformConfig, ExperimentConfig, PingPongConfig};
pub use report::Table;

pub const EXIT_USAGE: u8 = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    /// Build the representation; `emit` overrides `<out>/representation.json`.
    Construct {
        emit: Option<PathBuf>,
    },
    Certify,
    GapProfile,
    ScanPositivity,
    LimitSet,
    Deform,
    Pingpong,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Construct { .. } => "construct",
            Command::Certify => "certify",
            Command::GapProfile => "gap-profile",
            Command::ScanPositivity => "scan-positivity",
            Command::LimitSet => "limit-set",
            Command::Deform => "deform",
            Command::Pingpong => "pingpong",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Constructed,
    Profiled,
    Certified,
    Refuted,
    PositivelyProximal,
    NotPositivelyProximal,
    NoProximalFound,
    Transverse,
    NotTransverse,
    SignsConstant,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        use Status::*;
        match self {
            Constructed | Profiled | Certified | PositivelyProximal | Transverse | SignsConstant => 0,
            Refuted | NotPositivelyProximal | NotTransverse => 1,
            NoProximalFound | Inconclusive => 2,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] anosov::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("thread pool: {0}")]
    Threads(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        EXIT_USAGE
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: Status,
    /// One-page human summary for stdout.
    pub text: String,
    /// Files written, in order.
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        self.status.exit_code()
    }
}

/// Errors that say the request itself was wrong, as opposed to a numerical
/// failure on a valid request.
fn is_usage_error(e: &anosov::Error) -> bool {
    use anosov::Error::*;
    matches!(
        e,
        DimensionMismatch(_)
            | ResourceLimit(_)
            | DegreeMismatch(_)
            | InvalidIndex(_)
            | UnknownLetter(_)
            | DeterminantNotOne(_)
            | PresentationMismatch
            | InvalidParams(_)
            | InvalidMagnitude(_)
            | ConstructionFailure(_)
            | RelatorDefect(_)
            | InsufficientRadius { .. }
            | Format(_)
    )
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'static str,
    status: Status,
    exit_code: u8,
    construction: String,
    presentation: anosov::words::Presentation,
    dim: usize,
    seed: u64,
    config: &'a ExperimentConfig,
    results: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    files: Vec<String>,
}

/// Runs `command` under `config`, writing reports into `config.out`.
pub fn run(config: &ExperimentConfig, command: &Command) -> Result<RunOutcome, CliError> {
    config.validate()?;
    match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Threads(e.to_string()))?
            .install(|| run_inner(config, command)),
        None => run_inner(config, command),
    }
}

fn run_inner(config: &ExperimentConfig, command: &Command) -> Result<RunOutcome, CliError> {
    let rep = config.construction.build()?;
    let out = &config.out;
    std::fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.clone(), source })?;

    let mut files = Vec::new();
    let report = match command {
        Command::Construct { emit } => {
            let path = emit.clone().unwrap_or_else(|| out.join("representation.json"));
            write_file(&path, &rep.to_json())?;
            files.push(path);
            Ok(report::construct(&rep))
        }
        Command::Certify => report::certify(&rep, config),
        Command::GapProfile => report::gap_profile(&rep, config),
        Command::ScanPositivity => report::scan_positivity(&rep, config),
        Command::LimitSet => report::limit_set(&rep, config),
        Command::Deform => report::deform(&rep, config),
        Command::Pingpong => report::pingpong(&rep, config),
    };
    let (report, error) = match report {
        Ok(r) => (r, None),
        Err(e) if is_usage_error(&e) => return Err(e.into()),
        Err(e) => (report::Report::inconclusive(&e), Some(e.to_string())),
    };

    for (name, table) in &report.tables {
        let path = out.join(name);
        table.write(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        files.push(path);
    }
    let summary_path = out.join("summary.json");
    files.push(summary_path.clone());
    let summary = Summary {
        command: command.name(),
        status: report.status,
        exit_code: report.status.exit_code(),
        construction: config.construction.label(),
        presentation: *rep.presentation(),
        dim: rep.dim(),
        seed: config.seed,
        config,
        results: report.results,
        error,
        files: files.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy().into_owned()).collect(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    write_file(&summary_path, &json)?;

    let text = human_summary(config, command, &rep, &report.lines, report.status, &files);
    Ok(RunOutcome { status: report.status, text, files })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn human_summary(
    config: &ExperimentConfig,
    command: &Command,
    rep: &Representation,
    lines: &[String],
    status: Status,
    files: &[PathBuf],
) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<13}{v}\n"));
    line("command", command.name().into());
    line("construction", config.construction.label());
    line("group", format!("{}, dimension {}", rep.presentation().describe(), rep.dim()));
    line("radius", config.radius.to_string());
    line("seed", config.seed.to_string());
    for l in lines {
        s.push_str(l);
        s.push('\n');
    }
    s.push_str(&format!("{:<13}{status:?} (exit {})\n", "status", status.exit_code()));
    let names: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
    s.push_str(&format!("{:<13}{}\n", "wrote", names.join(", ")));
    s
}
