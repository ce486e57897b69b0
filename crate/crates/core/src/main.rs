//! `phaseqkd` command-line driver.
//!
//! Exit status: 0 on success, 2 for usage or validation errors, 1 for
//! internal or output failures.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phaseqkd::report::{
    cmd_analyze, cmd_simulate, cmd_sweep, cmd_threshold, parse_mu_grid, to_json,
    write_sweep_csv, write_sweep_json_lines,
};
use phaseqkd::{Attack, RunConfig, SourceConfig, SourceKind};

/// Keys accepted in a `--config` file. Each mirrors the flag of the same name.
const CONFIG_KEYS: [&str; 12] = [
    "mu",
    "delta",
    "phi",
    "n-signals",
    "seed",
    "workers",
    "transmittance",
    "mu-grid",
    "attack",
    "source",
    "format",
    "out",
];

#[derive(Parser, Debug)]
#[command(name = "phaseqkd", version, about = "Weak coherent BB84: phase-coherent attack vs phase-randomized security")]
struct Cli {
    /// Flat `key = value` file supplying defaults; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Attack figures for source P and the security verdict for source R.
    Analyze(AnalyzeArgs),
    /// Monte Carlo protocol run.
    Simulate(SimulateArgs),
    /// Table of analytic quantities over a grid of mean photon numbers.
    Sweep(SweepArgs),
    /// Largest provably secure mean photon number for an error rate.
    Threshold(ThresholdArgs),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    n_signals: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    transmittance: Option<f64>,
    #[arg(long, value_enum)]
    attack: Option<AttackArg>,
    /// Defaults to `p` under attack and `r` otherwise.
    #[arg(long, value_enum)]
    source: Option<SourceArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// `start:stop:step`, a comma-separated list, or a single value.
    #[arg(long)]
    mu_grid: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AttackArg {
    None,
    Ukd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SourceArg {
    R,
    P,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<phaseqkd::Error> for Failure {
    fn from(e: phaseqkd::Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

/// Config-file values, consulted when a flag is absent.
struct Defaults(BTreeMap<String, String>);

impl Defaults {
    fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self(BTreeMap::new()));
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Failure::Usage(format!("{}:{}: expected key = value", path.display(), lineno + 1))
            })?;
            let key = key.trim().replace('_', "-");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Failure::Usage(format!(
                    "{}:{}: unknown key {key:?}",
                    path.display(),
                    lineno + 1
                )));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(Self(map))
    }

    fn get<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, Failure> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.0
            .get(key)
            .map(|raw| {
                raw.parse()
                    .map_err(|_| Failure::Usage(format!("invalid value {raw:?} for {key}")))
            })
            .transpose()
    }

    fn require<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<T, Failure> {
        self.get(key, flag)?
            .ok_or_else(|| Failure::Usage(format!("missing required --{key}")))
    }

    fn choice<T: ValueEnum>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, Failure> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.0
            .get(key)
            .map(|raw| {
                T::from_str(raw, true)
                    .map_err(|_| Failure::Usage(format!("invalid value {raw:?} for {key}")))
            })
            .transpose()
    }
}

fn emit(out: Option<PathBuf>, body: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(&path, body)
            .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(body)
            .map_err(|e| Failure::Internal(format!("stdout: {e}"))),
    }
}

fn json_body<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = to_json(value);
    s.push('\n');
    s.into_bytes()
}

fn run(cli: Cli) -> Result<(), Failure> {
    let d = Defaults::load(cli.config.as_deref())?;
    match cli.command {
        Command::Analyze(a) => {
            let mu = d.require("mu", a.mu)?;
            let delta = d.require("delta", a.delta)?;
            let phi = d.get("phi", a.phi)?.unwrap_or(0.0);
            let report = cmd_analyze(mu, delta, phi)?;
            emit(d.get("out", a.out)?, &json_body(&report))
        }
        Command::Simulate(a) => {
            let attack = match d.choice("attack", a.attack)?.unwrap_or(AttackArg::Ukd) {
                AttackArg::None => Attack::None,
                AttackArg::Ukd => Attack::Ukd,
            };
            let kind = match d.choice("source", a.source)? {
                Some(SourceArg::P) => SourceKind::P,
                Some(SourceArg::R) => SourceKind::R,
                None if attack == Attack::Ukd => SourceKind::P,
                None => SourceKind::R,
            };
            let source = SourceConfig::new(
                kind,
                d.require("mu", a.mu)?,
                0.0,
                d.get("phi", a.phi)?.unwrap_or(0.0),
            )?;
            let config = RunConfig {
                n_signals: d.get("n-signals", a.n_signals)?.unwrap_or(1_000_000),
                source,
                attack,
                channel_transmittance: d.get("transmittance", a.transmittance)?.unwrap_or(1.0),
                seed: d.get("seed", a.seed)?.unwrap_or(0),
                workers: d.get("workers", a.workers)?.unwrap_or(1),
            };
            let report = cmd_simulate(&config)?;
            emit(d.get("out", a.out)?, &json_body(&report))
        }
        Command::Sweep(a) => {
            let grid = parse_mu_grid(&d.require::<String>("mu-grid", a.mu_grid)?)?;
            let delta = d.require("delta", a.delta)?;
            let phi = d.get("phi", a.phi)?.unwrap_or(0.0);
            let rows = cmd_sweep(&grid, delta, phi)?;
            let mut body = Vec::new();
            match d.choice("format", a.format)?.unwrap_or(FormatArg::Csv) {
                FormatArg::Csv => write_sweep_csv(&rows, &mut body)?,
                FormatArg::Json => write_sweep_json_lines(&rows, &mut body)?,
            }
            emit(d.get("out", a.out)?, &body)
        }
        Command::Threshold(a) => {
            let report = cmd_threshold(d.require("delta", a.delta)?)?;
            emit(d.get("out", a.out)?, &json_body(&report))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
