//! Command-line front end.
//!
//! `run` takes the full argument vector plus output streams and returns the
//! process exit code: 0 success, 1 usage or configuration error, 2 input
//! parse error, 3 internal invariant violation.

mod args;
mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::Path;

use clap::Parser;

pub use self::args::{
    parse_config_file, resolve, Cli, Command, InputFormat, Opts, OutputFormat, RunConfig,
};
pub use crate::units::{humanize_duration, Unit};

use crate::clustering::{fit, split_log, summarize_clusters};
use crate::discovery::{build_dfg, export_dot, extract_variants, rank_bottlenecks, DotMode, Mode};
use crate::error::{Error, Result};
use crate::ingest::{parse_csv, parse_mxml, write_csv};
use crate::log::{activity_frequency, log_statistics, EventLog};
use crate::testkit::{generate, GeneratorSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. }
        | Error::Xml(_)
        | Error::Csv(_)
        | Error::EmptyLog
        | Error::InvalidEvent(_) => EXIT_PARSE,
        Error::Config(_)
        | Error::InvalidThreshold(_)
        | Error::InvalidSpec(_)
        | Error::InvertedWindow { .. }
        | Error::Io(_) => EXIT_USAGE,
        Error::Invariant(_)
        | Error::SymbolOutOfAlphabet { .. }
        | Error::DegenerateAssignment(_)
        | Error::CaseSetMismatch(_) => EXIT_INTERNAL,
    }
}

pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let outcome = resolve(&cli.opts, cli.command.inputs())
        .and_then(|cfg| execute(&cli.command, &cfg, stdout, stderr));
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn load(cfg: &RunConfig, stderr: &mut dyn Write) -> Result<EventLog> {
    if cfg.inputs.is_empty() {
        return Err(Error::Config("no input files given".into()));
    }
    let mut log = EventLog::default();
    for (path, format) in &cfg.inputs {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let (part, report) = match format {
            InputFormat::Csv => parse_csv(&text, &cfg.mapping, cfg.strict)?,
            InputFormat::Mxml => {
                let (part, report) = parse_mxml(&text, Some(&cfg.lifecycle))?;
                if cfg.strict && report.rows_rejected > 0 {
                    let (locator, message) = report.first_errors[0].clone();
                    return Err(Error::Parse { locator, message });
                }
                (part, report)
            }
        };
        if report.rows_rejected > 0 {
            writeln!(
                stderr,
                "warning: {}: {} rows rejected, {} events parsed",
                path.display(),
                report.rows_rejected,
                report.events_parsed
            )?;
            for (locator, message) in &report.first_errors {
                writeln!(stderr, "  {locator}: {message}")?;
            }
        }
        log = if log.is_empty() {
            part
        } else {
            log.merged(&part)
        };
    }
    Ok(log)
}

fn write_to(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(
    command: &Command,
    cfg: &RunConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    let unit = cfg.unit;
    let text = match command {
        Command::Gen => {
            let spec_path = cfg
                .spec
                .as_ref()
                .ok_or_else(|| Error::Config("gen needs --spec <file>".into()))?;
            let spec_text = fs::read_to_string(spec_path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", spec_path.display())))?;
            let labeled = generate(&GeneratorSpec::from_toml(&spec_text)?)?;
            if let Some(truth) = &cfg.truth {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["case_id", "cluster"])?;
                for (case, c) in &labeled.truth {
                    w.write_record([case.as_str(), c.to_string().as_str()])?;
                }
                fs::write(
                    truth,
                    w.into_inner().map_err(|e| Error::Io(e.into_error()))?,
                )?;
            }
            return write_to(cfg.out.as_deref(), &write_csv(&labeled.log), stdout);
        }
        Command::Stats(_) => {
            let stats = report::StatsReport::new(&log_statistics(&load(cfg, stderr)?)?, unit);
            match cfg.output {
                OutputFormat::Text => stats.text(),
                OutputFormat::Json => report::json(&stats),
                OutputFormat::Csv => stats.csv(),
            }
        }
        Command::Frequency(_) => {
            let table = activity_frequency(&load(cfg, stderr)?);
            match cfg.output {
                OutputFormat::Text => report::frequency_text(&table),
                OutputFormat::Json => report::json(&table.rows),
                OutputFormat::Csv => report::frequency_csv(&table),
            }
        }
        Command::Variants(_) => {
            let variants = extract_variants(&load(cfg, stderr)?);
            let rows = report::variant_rows(&variants, unit);
            match cfg.output {
                OutputFormat::Text => report::variants_text(&rows),
                OutputFormat::Json => report::json(&rows),
                OutputFormat::Csv => report::variants_csv(&rows),
            }
        }
        Command::Map(_) => {
            let mode: DotMode = cfg.mode.as_deref().unwrap_or("frequency").parse()?;
            let dot = export_dot(&build_dfg(&load(cfg, stderr)?), mode, unit);
            return write_to(cfg.out.as_deref(), &dot, stdout);
        }
        Command::Bottlenecks(_) => {
            let mode: Mode = cfg.mode.as_deref().unwrap_or("total").parse()?;
            let ranked = rank_bottlenecks(&build_dfg(&load(cfg, stderr)?), mode, cfg.top_n)?;
            match cfg.output {
                OutputFormat::Text => report::bottleneck_text(&ranked, unit),
                OutputFormat::Json => report::bottleneck_json(&ranked, unit),
                OutputFormat::Csv => report::bottleneck_csv(&ranked),
            }
        }
        Command::Cluster(_) => {
            let log = load(cfg, stderr)?;
            let result = fit(&log, &cfg.fit)?;
            let parts = split_log(&log, &result, cfg.tau)?;
            let summary = summarize_clusters(&parts);
            match cfg.output {
                OutputFormat::Text => report::clustering_text(&result, &summary, unit),
                OutputFormat::Json => report::clustering_json(&result, &summary, cfg.tau, unit),
                OutputFormat::Csv => report::assignment_csv(&result),
            }
        }
        Command::Split(_) => {
            let log = load(cfg, stderr)?;
            let result = fit(&log, &cfg.fit)?;
            let parts = split_log(&log, &result, cfg.tau)?;
            fs::create_dir_all(&cfg.out_dir)?;
            let mut lines = String::new();
            for (i, part) in parts.iter().enumerate() {
                let name = format!("cluster_{i}.csv");
                fs::write(cfg.out_dir.join(&name), write_csv(part))?;
                lines.push_str(&format!(
                    "{name}  {} cases  {} events\n",
                    part.case_count(),
                    part.event_count()
                ));
            }
            lines
        }
    };
    stdout.write_all(text.as_bytes())?;
    Ok(())
}
