//! Text, JSON and CSV renderings of every report.
//!
//! JSON carries raw millisecond values next to each humanized string; text
//! uses two-decimal percentages and one-decimal durations.

use serde::Serialize;

use crate::clustering::{ClusterSummary, ClusteringResult, MarkovChain};
use crate::discovery::{BottleneckReport, Variant};
use crate::log::{FrequencyTable, LogStats, Timestamp};
use crate::units::{humanize_duration, Unit};

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.zip(&widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            s.push_str(cell);
            s.extend(std::iter::repeat_n(' ', w - cell.chars().count()));
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied());
    for row in rows {
        line(&mut row.iter().map(String::as_str));
    }
    out
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn instant(t: &Timestamp) -> String {
    t.format("%Y-%m-%d %H:%M:%S").to_string()
}

#[derive(Serialize)]
pub struct StatsReport {
    pub events: usize,
    pub cases: usize,
    pub activities: usize,
    pub median_case_duration_ms: f64,
    pub median_case_duration: String,
    pub mean_case_duration_ms: f64,
    pub mean_case_duration: String,
    pub start: String,
    pub end: String,
}

impl StatsReport {
    pub fn new(s: &LogStats, unit: Unit) -> Self {
        StatsReport {
            events: s.event_count,
            cases: s.case_count,
            activities: s.activity_count,
            median_case_duration_ms: s.median_case_duration_ms,
            median_case_duration: humanize_duration(s.median_case_duration_ms, unit),
            mean_case_duration_ms: s.mean_case_duration_ms,
            mean_case_duration: humanize_duration(s.mean_case_duration_ms, unit),
            start: instant(&s.start),
            end: instant(&s.end),
        }
    }

    fn pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("Events", self.events.to_string()),
            ("Cases", self.cases.to_string()),
            ("Activities", self.activities.to_string()),
            ("Median case duration", self.median_case_duration.clone()),
            ("Mean case duration", self.mean_case_duration.clone()),
            ("Start", self.start.clone()),
            ("End", self.end.clone()),
        ]
    }

    pub fn text(&self) -> String {
        let mut out = String::from("Statistic  Value\n");
        for (k, v) in self.pairs() {
            out.push_str(&format!("{k}  {v}\n"));
        }
        out
    }

    pub fn csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .pairs()
            .into_iter()
            .map(|(k, v)| vec![k.to_string(), v])
            .chain([
                vec![
                    "Median case duration (ms)".into(),
                    self.median_case_duration_ms.to_string(),
                ],
                vec![
                    "Mean case duration (ms)".into(),
                    self.mean_case_duration_ms.to_string(),
                ],
            ])
            .collect();
        csv_text(&["statistic", "value"], &rows)
    }
}

fn frequency_rows(t: &FrequencyTable) -> Vec<Vec<String>> {
    t.rows
        .iter()
        .map(|r| {
            vec![
                r.activity.clone(),
                r.frequency.to_string(),
                format!("{:.2}", r.relative_frequency),
            ]
        })
        .collect()
}

pub fn frequency_text(t: &FrequencyTable) -> String {
    table(
        &["Activity", "Frequency", "Relative frequency (%)"],
        &frequency_rows(t),
    )
}

pub fn frequency_csv(t: &FrequencyTable) -> String {
    let rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            vec![
                r.activity.clone(),
                r.frequency.to_string(),
                r.relative_frequency.to_string(),
            ]
        })
        .collect();
    csv_text(&["activity", "frequency", "relative_frequency"], &rows)
}

#[derive(Serialize)]
pub struct VariantRow<'a> {
    pub variant: usize,
    #[serde(flatten)]
    pub inner: &'a Variant,
    pub events_per_case: usize,
    pub max_case_duration: String,
}

pub fn variant_rows(variants: &[Variant], unit: Unit) -> Vec<VariantRow<'_>> {
    variants
        .iter()
        .enumerate()
        .map(|(i, v)| VariantRow {
            variant: i + 1,
            inner: v,
            events_per_case: v.sequence.len(),
            max_case_duration: humanize_duration(v.max_case_duration_ms as f64, unit),
        })
        .collect()
}

pub fn variants_text(rows: &[VariantRow]) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.variant.to_string(),
                r.inner.case_count.to_string(),
                r.events_per_case.to_string(),
                r.max_case_duration.clone(),
                r.inner.sequence.join(" > "),
            ]
        })
        .collect();
    table(
        &["Variant", "Cases", "Events", "Duration", "Sequence"],
        &cells,
    )
}

pub fn variants_csv(rows: &[VariantRow]) -> String {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.variant.to_string(),
                r.inner.case_count.to_string(),
                r.events_per_case.to_string(),
                r.inner.min_case_duration_ms.to_string(),
                r.inner.median_case_duration_ms.to_string(),
                r.inner.max_case_duration_ms.to_string(),
                r.inner.sequence.join(">"),
                r.inner.case_ids.join(" "),
            ]
        })
        .collect();
    csv_text(
        &[
            "variant",
            "cases",
            "events_per_case",
            "min_duration_ms",
            "median_duration_ms",
            "max_duration_ms",
            "sequence",
            "case_ids",
        ],
        &cells,
    )
}

#[derive(Serialize)]
pub struct BottleneckJson<'a> {
    #[serde(flatten)]
    pub report: &'a BottleneckReport,
    pub scores: Vec<String>,
}

pub fn bottleneck_json(r: &BottleneckReport, unit: Unit) -> String {
    json(&BottleneckJson {
        report: r,
        scores: r
            .entries
            .iter()
            .map(|e| humanize_duration(e.score_ms, unit))
            .collect(),
    })
}

pub fn bottleneck_text(r: &BottleneckReport, unit: Unit) -> String {
    let rows: Vec<Vec<String>> = r
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            vec![
                (i + 1).to_string(),
                e.from.clone(),
                e.to.clone(),
                e.frequency.to_string(),
                humanize_duration(e.score_ms, unit),
                if e.flagged {
                    "bottleneck".into()
                } else {
                    String::new()
                },
            ]
        })
        .collect();
    let threshold = r
        .threshold_ms
        .map(|t| humanize_duration(t, unit))
        .unwrap_or_else(|| "-".into());
    format!(
        "Mode  {}\nFlag rule  {} ({})\n\n{}",
        r.mode,
        r.rule,
        threshold,
        table(&["Rank", "From", "To", "Frequency", "Score", "Flag"], &rows)
    )
}

pub fn bottleneck_csv(r: &BottleneckReport) -> String {
    let rows: Vec<Vec<String>> = r
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            vec![
                (i + 1).to_string(),
                e.from.clone(),
                e.to.clone(),
                e.frequency.to_string(),
                e.score_ms.to_string(),
                e.flagged.to_string(),
            ]
        })
        .collect();
    csv_text(
        &["rank", "from", "to", "frequency", "score_ms", "flagged"],
        &rows,
    )
}

#[derive(Serialize)]
struct GroupJson<'a> {
    case_count: usize,
    case_ids: &'a [String],
    events_per_case: usize,
    max_case_duration_ms: u64,
    max_case_duration: String,
}

#[derive(Serialize)]
struct ClusterJson<'a> {
    cluster: usize,
    cases: usize,
    events: usize,
    groups: Vec<GroupJson<'a>>,
}

#[derive(Serialize)]
struct AssignmentJson<'a> {
    case_id: &'a str,
    cluster: usize,
    posteriors: &'a [f64],
}

#[derive(Serialize)]
struct ClusteringJson<'a> {
    k: usize,
    seed: u64,
    restarts: usize,
    winning_restart: usize,
    alpha: f64,
    tau: Option<f64>,
    iterations: usize,
    converged: bool,
    objective: f64,
    log_likelihood: f64,
    objective_trace: &'a [f64],
    reseeded_rounds: &'a [usize],
    alphabet: &'a [String],
    assignments: Vec<AssignmentJson<'a>>,
    clusters: Vec<ClusterJson<'a>>,
    chains: &'a [MarkovChain],
}

pub fn clustering_json(
    result: &ClusteringResult,
    summary: &ClusterSummary,
    tau: Option<f64>,
    unit: Unit,
) -> String {
    json(&ClusteringJson {
        k: result.k(),
        seed: result.seed,
        restarts: result.restarts,
        winning_restart: result.winning_restart,
        alpha: result.model.alpha,
        tau,
        iterations: result.iterations,
        converged: result.converged,
        objective: *result.objective_trace.last().unwrap_or(&f64::NAN),
        log_likelihood: result.log_likelihood,
        objective_trace: &result.objective_trace,
        reseeded_rounds: &result.reseeded_rounds,
        alphabet: &result.model.alphabet,
        assignments: result
            .hard_assignment
            .iter()
            .map(|(case, &cluster)| AssignmentJson {
                case_id: case,
                cluster,
                posteriors: &result.memberships[case],
            })
            .collect(),
        clusters: summary
            .clusters
            .iter()
            .enumerate()
            .map(|(i, c)| ClusterJson {
                cluster: i,
                cases: c.cases,
                events: c.events,
                groups: c
                    .groups
                    .iter()
                    .map(|g| GroupJson {
                        case_count: g.case_count,
                        case_ids: &g.case_ids,
                        events_per_case: g.events_per_case,
                        max_case_duration_ms: g.max_case_duration_ms,
                        max_case_duration: humanize_duration(g.max_case_duration_ms as f64, unit),
                    })
                    .collect(),
            })
            .collect(),
        chains: &result.model.chains,
    })
}

pub fn clustering_text(result: &ClusteringResult, summary: &ClusterSummary, unit: Unit) -> String {
    let mut out = String::new();
    out.push_str(&format!("Clusters  {}\n", result.k()));
    out.push_str(&format!("Seed  {}\n", result.seed));
    out.push_str(&format!(
        "Restarts  {} (best: {})\n",
        result.restarts, result.winning_restart
    ));
    out.push_str(&format!("Iterations  {}\n", result.iterations));
    out.push_str(&format!(
        "Converged  {}\n",
        if result.converged { "yes" } else { "no" }
    ));
    out.push_str(&format!(
        "Objective  {:.6}\n",
        result.objective_trace.last().copied().unwrap_or(f64::NAN)
    ));
    out.push_str(&format!("Log-likelihood  {:.6}\n", result.log_likelihood));
    let total_events: usize = summary.clusters.iter().map(|c| c.events).sum();
    out.push_str(&format!("Events across clusters  {total_events}\n"));
    for (i, c) in summary.clusters.iter().enumerate() {
        out.push_str(&format!(
            "\nCluster {i}: {} cases, {} events\n",
            c.cases, c.events
        ));
        let rows: Vec<Vec<String>> = c
            .groups
            .iter()
            .map(|g| {
                vec![
                    g.case_count.to_string(),
                    g.case_ids.join(", "),
                    g.events_per_case.to_string(),
                    humanize_duration(g.max_case_duration_ms as f64, unit),
                ]
            })
            .collect();
        out.push_str(&table(&["Instances", "Cases", "Events", "Duration"], &rows));
    }
    out
}

pub fn assignment_csv(result: &ClusteringResult) -> String {
    let rows: Vec<Vec<String>> = result
        .hard_assignment
        .iter()
        .map(|(case, c)| {
            let mut row = vec![case.clone(), c.to_string()];
            row.extend(result.memberships[case].iter().map(|p| p.to_string()));
            row
        })
        .collect();
    let mut header = vec!["case_id".to_string(), "cluster".to_string()];
    header.extend((0..result.k()).map(|k| format!("posterior_{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_text(&header, &rows)
}
