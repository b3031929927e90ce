//! Command-line surface: argument parsing, config-file merging, and the
//! five commands.
//!
//! Precedence for every setting is flag, then config file (`--config`,
//! flat `key = value` lines), then built-in default. The seed additionally
//! falls back to `QCCP_SEED` before the built-in default.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::classical::{self, CommTree};
use crate::error::Error;
use crate::experiment::{self, ExperimentParams};
use crate::quantum;
use crate::report::{self, Format, ReportError};
use crate::reproduce::{self, ReproduceConfig};
use crate::stats;
use crate::task::TaskId;

pub const SEED_ENV: &str = "QCCP_SEED";
pub const DEFAULT_SEED: u64 = 20_040_623;
pub const DEFAULT_BLOCK_SIZE: usize = 500;
pub const DEFAULT_BIN_WIDTH: f64 = 0.005;

#[derive(Debug, Parser)]
#[command(
    name = "qccp",
    version,
    about = "Bounded-communication protocols: classical bounds, single-qubit protocols, experiment model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form classical and quantum fidelities for 1..=N parties.
    Bounds(Options),
    /// Exhaustive search over all task A protocols on a tree (N <= 3).
    Certify(Options),
    /// Coordinate ascent for task B product strategies.
    Optimize(Options),
    /// Simulate the heralded-photon experiment.
    Experiment(Options),
    /// Run every reproduction check and report pass/fail.
    Reproduce(Options),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Flat key=value file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub task: Option<TaskId>,
    #[arg(long)]
    pub parties: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub streams: Option<u64>,
    /// Grid cells on [0, pi) for task B strategies.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Accepted runs to collect.
    #[arg(long = "n-target")]
    pub n_target: Option<u64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, conflicts_with = "visibility")]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub visibility: Option<f64>,
    /// Trigger events per second.
    #[arg(long = "trigger-rate")]
    pub trigger_rate: Option<f64>,
    /// Collection window in seconds; defaults to the optimal 1/rate.
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long = "block-size")]
    pub block_size: Option<usize>,
    #[arg(long = "bin-width")]
    pub bin_width: Option<f64>,
    /// chain or star.
    #[arg(long)]
    pub tree: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// record (JSON lines) or table (CSV).
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("config: {0}")]
    Config(String),
}

const CONFIG_KEYS: &[&str] = &[
    "task",
    "parties",
    "seed",
    "streams",
    "grid",
    "restarts",
    "n-target",
    "eta",
    "gamma",
    "visibility",
    "trigger-rate",
    "window",
    "block-size",
    "bin-width",
    "tree",
    "out",
    "format",
];

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Config(format!("bad value '{value}' for '{key}': {e}")))
}

/// Parse a flat `key = value` config. `#` starts a comment; keys use the
/// flag spellings (`n-target`, `trigger-rate`, ...). Unknown keys are an
/// error.
pub fn parse_config(text: &str) -> Result<Options, CliError> {
    let mut o = Options::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {}: expected key = value",
                lineno + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "task" => o.task = Some(parse_value(&key, value)?),
            "parties" => o.parties = Some(parse_value(&key, value)?),
            "seed" => o.seed = Some(parse_value(&key, value)?),
            "streams" => o.streams = Some(parse_value(&key, value)?),
            "grid" => o.grid = Some(parse_value(&key, value)?),
            "restarts" => o.restarts = Some(parse_value(&key, value)?),
            "n-target" => o.n_target = Some(parse_value(&key, value)?),
            "eta" => o.eta = Some(parse_value(&key, value)?),
            "gamma" => o.gamma = Some(parse_value(&key, value)?),
            "visibility" => o.visibility = Some(parse_value(&key, value)?),
            "trigger-rate" => o.trigger_rate = Some(parse_value(&key, value)?),
            "window" => o.window = Some(parse_value(&key, value)?),
            "block-size" => o.block_size = Some(parse_value(&key, value)?),
            "bin-width" => o.bin_width = Some(parse_value(&key, value)?),
            "tree" => o.tree = Some(value.to_string()),
            "out" => o.out = Some(PathBuf::from(value)),
            "format" => o.format = Some(parse_value(&key, value)?),
            other => {
                return Err(CliError::Config(format!(
                    "unknown key '{other}' (known: {})",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
    }
    if o.gamma.is_some() && o.visibility.is_some() {
        return Err(CliError::Config(
            "gamma and visibility are mutually exclusive".into(),
        ));
    }
    Ok(o)
}

impl Options {
    /// Fill every unset field from `base`.
    pub fn or(self, base: Options) -> Options {
        // a visibility flag overrides a gamma from the file, and vice versa
        let (gamma, visibility) = if self.gamma.is_some() || self.visibility.is_some() {
            (self.gamma, self.visibility)
        } else {
            (base.gamma, base.visibility)
        };
        Options {
            config: self.config.or(base.config),
            task: self.task.or(base.task),
            parties: self.parties.or(base.parties),
            seed: self.seed.or(base.seed),
            streams: self.streams.or(base.streams),
            grid: self.grid.or(base.grid),
            restarts: self.restarts.or(base.restarts),
            n_target: self.n_target.or(base.n_target),
            eta: self.eta.or(base.eta),
            gamma,
            visibility,
            trigger_rate: self.trigger_rate.or(base.trigger_rate),
            window: self.window.or(base.window),
            block_size: self.block_size.or(base.block_size),
            bin_width: self.bin_width.or(base.bin_width),
            tree: self.tree.or(base.tree),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
        }
    }

    /// Merge in the config file, if any.
    pub fn resolve(self) -> Result<Options, CliError> {
        match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                Ok(self.or(parse_config(&text)?))
            }
            None => Ok(self),
        }
    }

    fn seed(&self) -> Result<u64, CliError> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => parse_value(SEED_ENV, v.trim()),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }

    fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    fn parties(&self, default: usize) -> Result<usize, CliError> {
        let n = self.parties.unwrap_or(default);
        if n == 0 {
            return Err(Error::NoParties.into());
        }
        Ok(n)
    }

    fn tree(&self, n: usize) -> Result<CommTree, CliError> {
        match self.tree.as_deref().unwrap_or("chain") {
            "chain" => Ok(CommTree::chain(n)?),
            "star" => Ok(CommTree::star(n)?),
            other => Err(CliError::Config(format!(
                "unknown tree '{other}', expected chain or star"
            ))),
        }
    }

    /// Experiment parameters: the task's preset with overrides.
    pub fn experiment_params(&self, task: TaskId) -> Result<ExperimentParams, CliError> {
        let mut p = ExperimentParams::preset(task);
        if let Some(n) = self.parties {
            p.parties = n;
        }
        if let Some(rate) = self.trigger_rate {
            p.trigger_rate = rate;
            p.window = experiment::optimize_window(rate)?.window;
        }
        if let Some(w) = self.window {
            p.window = w;
        }
        if let Some(eta) = self.eta {
            p.eta = eta;
        }
        if let Some(g) = self.gamma {
            p.visibility = experiment::visibility_from_gamma(task, g)?;
        }
        if let Some(v) = self.visibility {
            p.visibility = v;
        }
        if let Some(n) = self.n_target {
            p.n_target = n;
        }
        p.validate()?;
        Ok(p)
    }
}

/// Where a command's files go. The main report is always also printed to
/// stdout.
struct Output {
    dir: Option<PathBuf>,
    format: Format,
}

impl Output {
    fn new(opts: &Options) -> Result<Self, CliError> {
        if let Some(dir) = &opts.out {
            fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.clone(),
                source,
            })?;
        }
        Ok(Output {
            dir: opts.out.clone(),
            format: opts.format(),
        })
    }

    fn path(&self, dir: &Path, name: &str) -> PathBuf {
        dir.join(format!("{name}.{}", self.format.extension()))
    }

    fn file<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<(), CliError> {
        if let Some(dir) = &self.dir {
            let path = self.path(dir, name);
            let text = report::render_rows(self.format, rows)?;
            fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
        }
        Ok(())
    }

    fn main<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<(), CliError> {
        let text = report::render_rows(self.format, rows)?;
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        lock.write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
        self.file(name, rows)
    }
}

/// Run a parsed command. `Ok(true)` when every check it performs passes.
pub fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Bounds(o) => cmd_bounds(&o.resolve()?),
        Command::Certify(o) => cmd_certify(&o.resolve()?),
        Command::Optimize(o) => cmd_optimize(&o.resolve()?),
        Command::Experiment(o) => cmd_experiment(&o.resolve()?),
        Command::Reproduce(o) => cmd_reproduce(&o.resolve()?),
    }
}

pub fn bounds_rows(tasks: &[TaskId], max_parties: usize) -> Result<Vec<report::BoundsRow>, Error> {
    let mut rows = Vec::new();
    for &task in tasks {
        for n in 1..=max_parties {
            let c = classical::classical_bound(task, n)?;
            let qf = quantum::quantum_fidelity(task, n)?;
            rows.push(report::BoundsRow {
                schema: report::schema("bounds"),
                task: task.to_string(),
                parties: n,
                classical_fidelity: c.fidelity,
                classical_success: c.success,
                quantum_fidelity: qf,
                quantum_success: (1.0 + qf) / 2.0,
            });
        }
    }
    Ok(rows)
}

fn cmd_bounds(o: &Options) -> Result<bool, CliError> {
    let n = o.parties(5)?;
    let tasks: Vec<TaskId> = match o.task {
        Some(t) => vec![t],
        None => TaskId::ALL.to_vec(),
    };
    let rows = bounds_rows(&tasks, n)?;
    Output::new(o)?.main("bounds", &rows)?;
    Ok(true)
}

fn cmd_certify(o: &Options) -> Result<bool, CliError> {
    if o.task == Some(TaskId::B) {
        return Err(CliError::Config(
            "certify searches task A protocols only".into(),
        ));
    }
    let n = o.parties(3)?;
    let tree = o.tree(n)?;
    let cert = classical::brute_force_bound_a(&tree)?;
    let closed = classical::classical_bound(TaskId::A, n)?.fidelity;
    let tables = cert
        .argmax
        .tables()
        .iter()
        .map(|t| report::join(t.iter().map(|s| s.value())))
        .collect::<Vec<_>>()
        .join(" | ");
    let row = report::CertifyRow {
        schema: report::schema("certify"),
        task: TaskId::A.to_string(),
        parties: n,
        tree: cert.tree.clone(),
        max_fidelity: cert.max_fidelity,
        closed_form: closed,
        search_space: cert.search_space,
        argmax_index: cert.argmax_index,
        argmax_tables: tables,
    };
    Output::new(o)?.main("certify", &[row])?;
    Ok(cert.max_fidelity == closed)
}

fn cmd_optimize(o: &Options) -> Result<bool, CliError> {
    if o.task == Some(TaskId::A) {
        return Err(CliError::Config(
            "optimize works on task B strategies; use certify for task A".into(),
        ));
    }
    let n = o.parties(5)?;
    let grid = o.grid.unwrap_or(classical::DEFAULT_GRID_CELLS);
    let restarts = o.restarts.unwrap_or(classical::DEFAULT_RESTARTS);
    let seed = o.seed()?;
    let rep = classical::optimize_b(n, grid, restarts, seed)?;
    let closed = classical::classical_bound(TaskId::B, n)?.fidelity;
    let monotone = rep
        .runs
        .iter()
        .all(|r| r.trace.windows(2).all(|w| w[1] >= w[0]));
    let out = Output::new(o)?;
    let trace: Vec<report::TraceRow> = rep
        .runs
        .iter()
        .flat_map(|r| {
            r.trace
                .iter()
                .enumerate()
                .map(|(sweep, &f)| report::TraceRow {
                    schema: report::schema("trace"),
                    stream: r.stream_id,
                    sweep,
                    fidelity: f,
                })
        })
        .collect();
    out.file("trace", &trace)?;
    let strategy: Vec<report::StrategyRow> = rep
        .best
        .strategy
        .cells()
        .iter()
        .enumerate()
        .map(|(party, signs)| report::StrategyRow {
            schema: report::schema("strategy"),
            party,
            signs: report::join(signs.iter().map(|s| s.value())),
        })
        .collect();
    out.file("strategy", &strategy)?;
    let row = report::OptimizeRow {
        schema: report::schema("optimize"),
        parties: n,
        grid,
        restarts,
        seed,
        best_stream: rep.best.stream_id,
        best_fidelity: rep.best.fidelity,
        closed_form: closed,
        ratio: rep.best.fidelity / closed,
        all_traces_monotone: monotone,
    };
    out.main("optimize", &[row])?;
    Ok(monotone)
}

fn cmd_experiment(o: &Options) -> Result<bool, CliError> {
    let task = o.task.unwrap_or(TaskId::A);
    let params = o.experiment_params(task)?;
    let seed = o.seed()?;
    let streams = o.streams.unwrap_or(1);
    let block_size = o.block_size.unwrap_or(DEFAULT_BLOCK_SIZE);
    let bin_width = o.bin_width.unwrap_or(DEFAULT_BIN_WIDTH);
    let outcome = experiment::simulate_experiment_parallel(&params, seed, streams)?;
    let s = outcome.stats;
    let classical_success = classical::classical_bound(task, params.parties)?.success;
    let violation = stats::sigma_violation(&s, classical_success).unwrap_or(f64::NAN);
    let out = Output::new(o)?;

    let runs: Vec<report::RunRow> = outcome
        .records
        .iter()
        .map(|r| report::RunRow {
            schema: report::schema("run"),
            seed: r.seed,
            stream: r.stream,
            inputs: report::join(r.input.as_reals()),
            trigger_count: r.trigger_count,
            accepted: r.accepted,
            detected: r.detected,
            guessed: r.guessed,
            answer: r.answer.value(),
            truth: r.truth.value(),
        })
        .collect();
    out.file("runs", &runs)?;

    // too few runs for one block is not fatal for the experiment itself
    if let Ok(h) = stats::block_histogram(outcome.accepted(), block_size, bin_width) {
        let rows: Vec<report::HistogramRow> = h
            .counts
            .iter()
            .enumerate()
            .map(|(i, &count)| report::HistogramRow {
                schema: report::schema("histogram"),
                block_size,
                bin_lo: h.bin_edges[i],
                bin_hi: h.bin_edges[i + 1],
                count,
            })
            .collect();
        out.file("histogram", &rows)?;
    }

    let row = report::ExperimentRow {
        schema: report::schema("experiment"),
        task: task.to_string(),
        parties: params.parties,
        seed,
        streams,
        trigger_rate: params.trigger_rate,
        window: params.window,
        eta: params.eta,
        visibility: params.visibility,
        gamma: params.gamma(),
        windows: outcome.records.len() as u64,
        n: s.n,
        successes: s.successes,
        p_hat: s.p_hat,
        sigma: s.sigma,
        predicted: experiment::predicted_success(params.eta, params.gamma())?,
        classical_success,
        violation,
    };
    out.main("experiment", &[row])?;
    Ok(true)
}

/// Reproduction config from options: seed, streams, and experiment
/// overrides applied to both presets.
pub fn reproduce_config(o: &Options) -> Result<ReproduceConfig, CliError> {
    let mut cfg = ReproduceConfig::new(o.seed()?);
    cfg.streams = o.streams.unwrap_or(1);
    cfg.experiment_a = o.experiment_params(TaskId::A)?;
    cfg.experiment_b = o.experiment_params(TaskId::B)?;
    Ok(cfg)
}

fn cmd_reproduce(o: &Options) -> Result<bool, CliError> {
    let cfg = reproduce_config(o)?;
    let checks = reproduce::run(&cfg)?;
    let rows: Vec<report::CheckRow> = checks.iter().map(|c| c.row()).collect();
    Output::new(o)?.main("reproduce", &rows)?;
    Ok(reproduce::all_pass(&checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let o = parse_config("# comment\ntask = B\nn_target=100\neta = 0.5 # trailing\n").unwrap();
        assert_eq!(o.task, Some(TaskId::B));
        assert_eq!(o.n_target, Some(100));
        assert_eq!(o.eta, Some(0.5));
        assert!(parse_config("colour = red").is_err());
        assert!(parse_config("eta").is_err());
        assert!(parse_config("eta = lots").is_err());
        assert!(parse_config("gamma = 0.9\nvisibility = 0.9").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config("eta = 0.5\ngamma = 0.9\nparties = 4").unwrap();
        let flags = Options {
            eta: Some(0.7),
            visibility: Some(0.8),
            ..Options::default()
        };
        let merged = flags.or(file);
        assert_eq!(merged.eta, Some(0.7));
        assert_eq!(merged.parties, Some(4));
        assert_eq!(merged.gamma, None);
        assert_eq!(merged.visibility, Some(0.8));
    }

    #[test]
    fn experiment_overrides_validate() {
        let o = Options {
            eta: Some(1.5),
            ..Options::default()
        };
        assert!(o.experiment_params(TaskId::A).is_err());
        let o = Options {
            trigger_rate: Some(1e4),
            ..Options::default()
        };
        assert_eq!(o.experiment_params(TaskId::A).unwrap().window, 1e-4);
        let o = Options {
            gamma: Some(0.95),
            ..Options::default()
        };
        assert!(o.experiment_params(TaskId::B).is_err());
    }

    #[test]
    fn bounds_table() {
        let rows = bounds_rows(&[TaskId::A], 5).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].classical_success, 1.0);
        assert_eq!(rows[0].quantum_success, 1.0);
        assert_eq!(rows[4].classical_success, 0.625);
        assert_eq!(rows[4].quantum_success, 1.0);
        let b = bounds_rows(&[TaskId::B], 5).unwrap();
        assert!((b[4].classical_success - 0.582).abs() < 1e-3);
        assert!((b[4].quantum_success - 0.892).abs() < 1e-3);
    }
}
