//! Command-line front end. The `reachsim` binary is a thin wrapper around
//! [`execute`].

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::sim::{run_scenario, ConfigError, ScenarioConfig, SimError};
use crate::topology::{emit_topology, enumerate_loop_free_paths, generate, load_topology, GeneratorSpec, TopologyError};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

/// Files written by `run`, relative to the output directory.
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_JSON: &str = "report.json";
pub const TABLES_DUMP: &str = "tables.dump";
pub const EVENT_LOG_HASH: &str = "event_log.hash";

#[derive(Debug, Parser)]
#[command(name = "reachsim", version, about = "Seeded routing-protocol simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write its report, final tables and event-log hash.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config key; repeatable, later wins.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, env = "REACHSIM_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// List every loop-free path between two routers (by label).
    Oracle { topology: PathBuf, src: u32, dst: u32 },
    /// Write a generated topology, e.g. `ring:5` or `velcro:10,5,2`.
    Gen {
        spec: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Topology { path: PathBuf, source: TopologyError },
    #[error("bad generator spec: {0}")]
    Spec(TopologyError),
    #[error("no router labelled {0}")]
    UnknownRouter(u32),
    #[error(transparent)]
    Sim(SimError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Sim(e) if !e.is_config_error() => EXIT_RUNTIME,
            CliError::Write { .. } => EXIT_RUNTIME,
            _ => EXIT_CONFIG,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(c) => CliError::Config(c),
            other => CliError::Sim(other),
        }
    }
}

/// Runs one command, writing human-readable output to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, overrides, seed, out } => cmd_run(&config, &overrides, seed, &out, stdout),
        Command::Oracle { topology, src, dst } => cmd_oracle(&topology, src, dst, stdout),
        Command::Gen { spec, out } => cmd_gen(&spec, &out),
    }
}

pub fn cmd_run(
    config: &Path,
    overrides: &[String],
    seed: Option<u64>,
    out: &Path,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let mut cfg = ScenarioConfig::from_file(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    for kv in overrides {
        let (k, v) = kv.split_once('=').ok_or_else(|| ConfigError::BadValue {
            key: kv.clone(),
            value: String::new(),
            reason: "expected KEY=VALUE".into(),
        })?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    let outcome = run_scenario(cfg)?;
    std::fs::create_dir_all(out).map_err(|source| CliError::Write { path: out.to_path_buf(), source })?;
    let files = [
        (REPORT_CSV, outcome.report.to_csv()),
        (REPORT_JSON, outcome.report.to_json()),
        (TABLES_DUMP, outcome.tables_dump),
        (EVENT_LOG_HASH, format!("{}\n", outcome.event_log_hash)),
    ];
    for (name, body) in files {
        let path = out.join(name);
        std::fs::write(&path, body).map_err(|source| CliError::Write { path, source })?;
    }
    let _ = writeln!(stdout, "{} {}", outcome.event_log_hash, out.display());
    Ok(())
}

pub fn cmd_oracle(topology: &Path, src: u32, dst: u32, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = std::fs::read_to_string(topology)
        .map_err(|source| ConfigError::Io { path: topology.to_path_buf(), source })?;
    let t = load_topology(&text).map_err(|source| CliError::Topology { path: topology.to_path_buf(), source })?;
    let s = t.router_by_label(src).ok_or(CliError::UnknownRouter(src))?;
    let d = t.router_by_label(dst).ok_or(CliError::UnknownRouter(dst))?;
    let mut paths = enumerate_loop_free_paths(&t, s, d, None).paths;
    paths.sort_by(|a, b| a.total_cost.cmp(&b.total_cost).then_with(|| a.hops.cmp(&b.hops)));
    let mut lines = vec![format!("{} paths", paths.len())];
    for p in &paths {
        let labels: Vec<String> = p.routers().iter().map(|&r| t.label(r).to_string()).collect();
        lines.push(format!("{}\tcost {}", labels.join(" -> "), p.total_cost));
    }
    let _ = writeln!(stdout, "{}", lines.join("\n"));
    Ok(())
}

pub fn cmd_gen(spec: &str, out: &Path) -> Result<(), CliError> {
    let spec: GeneratorSpec = spec.parse().map_err(CliError::Spec)?;
    let t = generate(&spec).map_err(CliError::Spec)?;
    std::fs::write(out, emit_topology(&t)).map_err(|source| CliError::Write { path: out.to_path_buf(), source })
}
