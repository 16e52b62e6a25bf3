use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::clustering::FitConfig;
use crate::error::{Error, Result};
use crate::ingest::CsvMapping;
use crate::units::Unit;

#[derive(Debug, Parser)]
#[command(
    name = "procmine",
    version,
    about = "Event-log variants, process maps, bottlenecks and sequence clustering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Inputs {
    /// Event log files (CSV or MXML).
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Event, case and duration statistics.
    Stats(Inputs),
    /// Activity frequencies.
    Frequency(Inputs),
    /// Trace variants with case counts and durations.
    Variants(Inputs),
    /// Directly-follows process map as DOT.
    Map(Inputs),
    /// Edges ranked by idle time.
    Bottlenecks(Inputs),
    /// Markov-chain sequence clustering.
    Cluster(Inputs),
    /// Write one CSV sub-log per cluster.
    Split(Inputs),
    /// Generate a synthetic CSV log from a generator spec (TOML).
    Gen,
}

impl Command {
    pub fn inputs(&self) -> &[PathBuf] {
        match self {
            Command::Stats(i)
            | Command::Frequency(i)
            | Command::Variants(i)
            | Command::Map(i)
            | Command::Bottlenecks(i)
            | Command::Cluster(i)
            | Command::Split(i) => &i.inputs,
            Command::Gen => &[],
        }
    }
}

/// Every flag is optional here; [`resolve`] fills gaps from the config file
/// and then from built-in defaults.
#[derive(Debug, Args, Clone, Default)]
pub struct Opts {
    /// key=value file mirroring the long flag names; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Input format: csv or mxml (default: by file extension).
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub case_column: Option<String>,
    #[arg(long, global = true)]
    pub activity_column: Option<String>,
    #[arg(long, global = true)]
    pub timestamp_column: Option<String>,
    /// "rfc3339" or a chrono pattern such as "%d/%m/%Y %H:%M".
    #[arg(long, global = true)]
    pub timestamp_format: Option<String>,
    #[arg(long, global = true)]
    pub delimiter: Option<char>,
    /// Abort on the first unparseable row.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub strict: Option<bool>,
    /// MXML lifecycle transitions to keep, comma separated.
    #[arg(long, global = true)]
    pub lifecycle: Option<String>,
    /// text, json or csv.
    #[arg(short, long, global = true)]
    pub output: Option<String>,
    /// Map: frequency|total|mean|max. Bottlenecks: total|mean|max.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// auto|secs|mins|hours|days|weeks|months|years.
    #[arg(long, global = true)]
    pub unit: Option<String>,
    #[arg(long, global = true)]
    pub top_n: Option<usize>,
    #[arg(short, long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Posterior threshold for overlapping clusters, in (0, 1].
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Directory for `split` output.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Output file instead of stdout (map, gen).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Generator spec for `gen`.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Where `gen` writes ground-truth labels (CSV).
    #[arg(long, global = true)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Mxml,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub inputs: Vec<(PathBuf, InputFormat)>,
    pub mapping: CsvMapping,
    pub strict: bool,
    pub lifecycle: BTreeSet<String>,
    pub output: OutputFormat,
    pub mode: Option<String>,
    pub unit: Unit,
    pub top_n: usize,
    pub fit: FitConfig,
    pub tau: Option<f64>,
    pub out_dir: PathBuf,
    pub out: Option<PathBuf>,
    pub spec: Option<PathBuf>,
    pub truth: Option<PathBuf>,
}

/// Parses `key = value` lines; `#` starts a comment. Keys accept `_` or `-`.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key=value", n + 1)))?;
        out.insert(key.trim().replace('_', "-"), value.trim().to_string());
    }
    Ok(out)
}

const KNOWN_KEYS: &[&str] = &[
    "format",
    "case-column",
    "activity-column",
    "timestamp-column",
    "timestamp-format",
    "delimiter",
    "strict",
    "lifecycle",
    "output",
    "mode",
    "unit",
    "top-n",
    "k",
    "seed",
    "alpha",
    "tau",
    "restarts",
    "max-iter",
    "tol",
    "out-dir",
    "out",
    "spec",
    "truth",
];

struct Layer<'a> {
    file: &'a BTreeMap<String, String>,
}

impl Layer<'_> {
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("config key '{key}': cannot parse '{raw}'"))),
        }
    }
}

fn parse_with<T: FromStr>(raw: &str, what: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("invalid {what} '{raw}'")))
}

fn detect_format(path: &Path) -> InputFormat {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
    {
        Some(ext) if ext == "mxml" || ext == "xml" => InputFormat::Mxml,
        _ => InputFormat::Csv,
    }
}

pub fn resolve(opts: &Opts, inputs: &[PathBuf]) -> Result<RunConfig> {
    let file =
        match &opts.config {
            Some(path) => parse_config_file(&std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", path.display()))
            })?)?,
            None => BTreeMap::new(),
        };
    if let Some(unknown) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown config key '{unknown}'")));
    }
    let l = Layer { file: &file };

    let format = l.pick(opts.format.clone(), "format")?;
    let forced = match format.as_deref() {
        None => None,
        Some("csv") => Some(InputFormat::Csv),
        Some("mxml") => Some(InputFormat::Mxml),
        Some(other) => return Err(Error::Config(format!("unknown input format '{other}'"))),
    };
    let inputs = inputs
        .iter()
        .map(|p| (p.clone(), forced.unwrap_or_else(|| detect_format(p))))
        .collect();

    let defaults = CsvMapping::default();
    let mapping = CsvMapping {
        case_column: l
            .pick(opts.case_column.clone(), "case-column")?
            .unwrap_or(defaults.case_column),
        activity_column: l
            .pick(opts.activity_column.clone(), "activity-column")?
            .unwrap_or(defaults.activity_column),
        timestamp_column: l
            .pick(opts.timestamp_column.clone(), "timestamp-column")?
            .unwrap_or(defaults.timestamp_column),
        timestamp_format: l
            .pick(opts.timestamp_format.clone(), "timestamp-format")?
            .unwrap_or(defaults.timestamp_format),
        delimiter: l
            .pick(opts.delimiter, "delimiter")?
            .unwrap_or(defaults.delimiter),
    };
    mapping.validate()?;

    let strict = l.pick(opts.strict, "strict")?.unwrap_or(false);
    let lifecycle = l
        .pick(opts.lifecycle.clone(), "lifecycle")?
        .unwrap_or_else(|| "complete".to_string())
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();

    let output = match l
        .pick(opts.output.clone(), "output")?
        .as_deref()
        .unwrap_or("text")
    {
        "text" => OutputFormat::Text,
        "json" => OutputFormat::Json,
        "csv" => OutputFormat::Csv,
        other => return Err(Error::Config(format!("unknown output format '{other}'"))),
    };
    let unit = match l.pick(opts.unit.clone(), "unit")? {
        Some(u) => parse_with::<Unit>(&u, "unit")?,
        None => Unit::Auto,
    };
    let top_n = l.pick(opts.top_n, "top-n")?.unwrap_or(10);
    if top_n == 0 {
        return Err(Error::Config("top-n must be at least 1".into()));
    }

    let d = FitConfig::default();
    let fit = FitConfig {
        k: l.pick(opts.k, "k")?.unwrap_or(d.k),
        seed: l.pick(opts.seed, "seed")?.unwrap_or(d.seed),
        alpha: l.pick(opts.alpha, "alpha")?.unwrap_or(d.alpha),
        max_iter: l.pick(opts.max_iter, "max-iter")?.unwrap_or(d.max_iter),
        tol: l.pick(opts.tol, "tol")?.unwrap_or(d.tol),
        restarts: l.pick(opts.restarts, "restarts")?.unwrap_or(d.restarts),
    };
    if fit.k == 0
        || fit.restarts == 0
        || fit.alpha.is_nan()
        || fit.alpha < 0.0
        || fit.tol.is_nan()
        || fit.tol < 0.0
    {
        return Err(Error::Config(
            "clustering needs k >= 1, restarts >= 1, alpha >= 0 and tol >= 0".into(),
        ));
    }
    let tau = l.pick(opts.tau, "tau")?;
    if let Some(t) = tau {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidThreshold(t));
        }
    }

    Ok(RunConfig {
        inputs,
        mapping,
        strict,
        lifecycle,
        output,
        mode: l.pick(opts.mode.clone(), "mode")?,
        unit,
        top_n,
        fit,
        tau,
        out_dir: l
            .pick(opts.out_dir.clone(), "out-dir")?
            .unwrap_or_else(|| PathBuf::from(".")),
        out: l.pick(opts.out.clone(), "out")?,
        spec: l.pick(opts.spec.clone(), "spec")?,
        truth: l.pick(opts.truth.clone(), "truth")?,
    })
}
