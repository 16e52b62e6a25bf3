//! In-memory event-log model: events, per-case traces, log statistics,
//! activity frequencies and filtering.
//!
//! Every [`EventLog`] is produced by [`build_log`], which groups events by
//! case, orders each trace by timestamp (stable on ties) and records the
//! activity alphabet. Values are immutable once built.

use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::{DateTime, Utc};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Timestamp = DateTime<Utc>;

/// Non-negative gap between two instants in whole milliseconds.
pub fn span_ms(from: Timestamp, to: Timestamp) -> u64 {
    (to - from).num_milliseconds().max(0) as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub case_id: String,
    pub activity: String,
    pub timestamp: Timestamp,
    pub attributes: BTreeMap<String, String>,
}

impl Event {
    pub fn new(
        case_id: impl Into<String>,
        activity: impl Into<String>,
        timestamp: Timestamp,
    ) -> Result<Self> {
        let case_id = case_id.into();
        let activity = activity.into();
        if case_id.is_empty() {
            return Err(Error::InvalidEvent("empty case id".into()));
        }
        if activity.is_empty() {
            return Err(Error::InvalidEvent(format!(
                "empty activity in case {case_id}"
            )));
        }
        Ok(Event {
            case_id,
            activity,
            timestamp,
            attributes: BTreeMap::new(),
        })
    }

    pub fn with_attributes(mut self, attributes: BTreeMap<String, String>) -> Self {
        self.attributes = attributes;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    case_id: String,
    events: Vec<Event>,
}

impl Trace {
    pub fn case_id(&self) -> &str {
        &self.case_id
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn activities(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| e.activity.as_str())
    }

    /// Last timestamp minus first; zero for single-event traces.
    pub fn duration_ms(&self) -> u64 {
        match (self.events.first(), self.events.last()) {
            (Some(first), Some(last)) => span_ms(first.timestamp, last.timestamp),
            _ => 0,
        }
    }
}

/// A set of traces with unique case ids. Traces keep the order in which their
/// case first appeared in the input; the alphabet keeps first-appearance order
/// of activities.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventLog {
    traces: Vec<Trace>,
    alphabet: Vec<String>,
}

impl EventLog {
    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn case_count(&self) -> usize {
        self.traces.len()
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(Trace::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn trace(&self, case_id: &str) -> Option<&Trace> {
        self.traces.iter().find(|t| t.case_id == case_id)
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.traces.iter().flat_map(|t| t.events.iter())
    }

    /// Concatenation of both logs' events, rebuilt. Cases present in both are merged.
    pub fn merged(&self, other: &EventLog) -> EventLog {
        build_log(self.events().chain(other.events()).cloned())
    }
}

/// Groups events by case, sorts every trace by timestamp keeping input order
/// for equal instants, and computes the alphabet.
pub fn build_log(events: impl IntoIterator<Item = Event>) -> EventLog {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut traces: Vec<Trace> = Vec::new();
    for event in events {
        let slot = match index.get(&event.case_id) {
            Some(&i) => i,
            None => {
                index.insert(event.case_id.clone(), traces.len());
                traces.push(Trace {
                    case_id: event.case_id.clone(),
                    events: Vec::new(),
                });
                traces.len() - 1
            }
        };
        traces[slot].events.push(event);
    }

    let mut seen = HashSet::new();
    let mut alphabet = Vec::new();
    for trace in &mut traces {
        // sort_by_key is stable
        trace.events.sort_by_key(|e| e.timestamp);
        for e in &trace.events {
            if seen.insert(e.activity.clone()) {
                alphabet.push(e.activity.clone());
            }
        }
    }
    EventLog { traces, alphabet }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogStats {
    pub event_count: usize,
    pub case_count: usize,
    pub activity_count: usize,
    pub median_case_duration_ms: f64,
    pub mean_case_duration_ms: f64,
    pub start: Timestamp,
    pub end: Timestamp,
}

/// Middle order statistic; mean of the two middle values for even counts.
pub(crate) fn median(sorted: &[u64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
    }
}

pub fn log_statistics(log: &EventLog) -> Result<LogStats> {
    let start = log
        .events()
        .map(|e| e.timestamp)
        .min()
        .ok_or(Error::EmptyLog)?;
    let end = log
        .events()
        .map(|e| e.timestamp)
        .max()
        .ok_or(Error::EmptyLog)?;
    let mut durations: Vec<u64> = log.traces.iter().map(Trace::duration_ms).collect();
    durations.sort_unstable();
    let total: u128 = durations.iter().map(|&d| d as u128).sum();
    Ok(LogStats {
        event_count: log.event_count(),
        case_count: log.case_count(),
        activity_count: log.alphabet.len(),
        median_case_duration_ms: median(&durations),
        mean_case_duration_ms: total as f64 / durations.len() as f64,
        start,
        end,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyRow {
    pub activity: String,
    pub frequency: usize,
    /// Percentage of all events, unrounded.
    pub relative_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FrequencyTable {
    pub rows: Vec<FrequencyRow>,
}

pub fn activity_frequency(log: &EventLog) -> FrequencyTable {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for e in log.events() {
        *counts.entry(e.activity.as_str()).or_default() += 1;
    }
    let total = log.event_count() as f64;
    let mut rows: Vec<FrequencyRow> = counts
        .into_iter()
        .map(|(activity, frequency)| FrequencyRow {
            activity: activity.to_string(),
            frequency,
            relative_frequency: 100.0 * frequency as f64 / total,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.frequency
            .cmp(&a.frequency)
            .then_with(|| a.activity.cmp(&b.activity))
    });
    FrequencyTable { rows }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Criterion {
    CaseIds(HashSet<String>),
    /// Inclusive on both ends.
    TimeWindow {
        from: Timestamp,
        to: Timestamp,
    },
    Activities(HashSet<String>),
}

pub fn filter_log(log: &EventLog, criterion: &Criterion) -> Result<EventLog> {
    let kept: Vec<Event> = match criterion {
        Criterion::CaseIds(ids) => log
            .traces
            .iter()
            .filter(|t| ids.contains(&t.case_id))
            .flat_map(|t| t.events.iter().cloned())
            .collect(),
        Criterion::TimeWindow { from, to } => {
            if from > to {
                return Err(Error::InvertedWindow {
                    from: from.to_rfc3339(),
                    to: to.to_rfc3339(),
                });
            }
            log.events()
                .filter(|e| *from <= e.timestamp && e.timestamp <= *to)
                .cloned()
                .collect()
        }
        Criterion::Activities(keep) => log
            .events()
            .filter(|e| keep.contains(&e.activity))
            .cloned()
            .collect(),
    };
    Ok(build_log(kept))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn at(secs: i64) -> Timestamp {
        Utc.timestamp_opt(secs, 0).unwrap()
    }

    fn ev(case: &str, act: &str, secs: i64) -> Event {
        Event::new(case, act, at(secs)).unwrap()
    }

    #[test]
    fn empty_input_gives_empty_log() {
        let log = build_log(Vec::new());
        assert_eq!(log.case_count(), 0);
        assert_eq!(log.event_count(), 0);
        assert!(log.alphabet().is_empty());
        assert!(matches!(log_statistics(&log), Err(Error::EmptyLog)));
        assert!(activity_frequency(&log).rows.is_empty());
    }

    #[test]
    fn traces_sorted_by_time() {
        let log = build_log(vec![ev("c1", "A", 10), ev("c1", "B", 5)]);
        let acts: Vec<_> = log.traces()[0].activities().collect();
        assert_eq!(acts, ["B", "A"]);
    }

    #[test]
    fn equal_timestamps_keep_input_order() {
        let log = build_log(vec![ev("c1", "B", 5), ev("c1", "A", 5)]);
        let acts: Vec<_> = log.traces()[0].activities().collect();
        assert_eq!(acts, ["B", "A"]);
    }

    #[test]
    fn empty_fields_rejected() {
        assert!(Event::new("", "A", at(0)).is_err());
        assert!(Event::new("c", "", at(0)).is_err());
    }

    #[test]
    fn activity_names_are_case_sensitive() {
        let log = build_log(vec![ev("c1", "weaving", 0), ev("c1", "Weaving", 1)]);
        assert_eq!(log.alphabet().len(), 2);
    }

    #[test]
    fn zero_span_case() {
        let log = build_log(vec![ev("c1", "A", 7), ev("c1", "B", 7)]);
        let s = log_statistics(&log).unwrap();
        assert_eq!(s.median_case_duration_ms, 0.0);
        assert_eq!(s.mean_case_duration_ms, 0.0);
    }

    #[test]
    fn median_and_mean_of_three_cases() {
        let day = 86_400;
        let log = build_log(vec![
            ev("a", "X", 0),
            ev("a", "Y", day),
            ev("b", "X", 0),
            ev("b", "Y", 2 * day),
            ev("c", "X", 0),
            ev("c", "Y", 10 * day),
        ]);
        let s = log_statistics(&log).unwrap();
        let day_ms = 86_400_000.0;
        assert_eq!(s.median_case_duration_ms, 2.0 * day_ms);
        // (1 + 2 + 10) / 3 days
        assert!((s.mean_case_duration_ms / day_ms - 4.333_333_333).abs() < 1e-6);
        assert_eq!(s.start, at(0));
        assert_eq!(s.end, at(10 * day));
    }

    #[test]
    fn median_of_even_count_averages_middle_pair() {
        assert_eq!(median(&[1, 2, 4, 9]), 3.0);
        assert_eq!(median(&[5]), 5.0);
    }

    #[test]
    fn single_activity_is_full_share() {
        let log = build_log((0..5).map(|i| ev("c", "A", i)));
        let t = activity_frequency(&log);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].frequency, 5);
        assert_eq!(format!("{:.2}", t.rows[0].relative_frequency), "100.00");
    }

    #[test]
    fn frequency_ties_sorted_by_name() {
        let log = build_log(vec![
            ev("c", "B", 0),
            ev("c", "A", 1),
            ev("c", "C", 2),
            ev("c", "C", 3),
        ]);
        let names: Vec<_> = activity_frequency(&log)
            .rows
            .into_iter()
            .map(|r| r.activity)
            .collect();
        assert_eq!(names, ["C", "A", "B"]);
    }

    fn two_case_log() -> EventLog {
        build_log(vec![
            ev("c1", "A", 0),
            ev("c1", "B", 1),
            ev("c2", "B", 2),
            ev("c2", "C", 3),
        ])
    }

    #[test]
    fn activity_projection() {
        let keep = ["B", "C"].iter().map(|s| s.to_string()).collect();
        let out = filter_log(&two_case_log(), &Criterion::Activities(keep)).unwrap();
        let seqs: Vec<Vec<&str>> = out
            .traces()
            .iter()
            .map(|t| t.activities().collect())
            .collect();
        assert_eq!(seqs, vec![vec!["B"], vec!["B", "C"]]);
    }

    #[test]
    fn vacuous_window_and_inverted_window() {
        let log = two_case_log();
        let out = filter_log(
            &log,
            &Criterion::TimeWindow {
                from: at(100),
                to: at(200),
            },
        )
        .unwrap();
        assert!(out.is_empty());
        let err = filter_log(
            &log,
            &Criterion::TimeWindow {
                from: at(5),
                to: at(1),
            },
        );
        assert!(matches!(err, Err(Error::InvertedWindow { .. })));
    }

    #[test]
    fn window_bounds_inclusive_and_drops_empty_traces() {
        let out = filter_log(
            &two_case_log(),
            &Criterion::TimeWindow {
                from: at(1),
                to: at(2),
            },
        )
        .unwrap();
        assert_eq!(out.case_count(), 2);
        assert_eq!(out.event_count(), 2);
        let out = filter_log(
            &two_case_log(),
            &Criterion::TimeWindow {
                from: at(2),
                to: at(3),
            },
        )
        .unwrap();
        assert_eq!(out.case_count(), 1);
        assert_eq!(out.traces()[0].case_id(), "c2");
    }

    #[test]
    fn identity_case_filter() {
        let log = two_case_log();
        let ids = log
            .traces()
            .iter()
            .map(|t| t.case_id().to_string())
            .collect();
        assert_eq!(filter_log(&log, &Criterion::CaseIds(ids)).unwrap(), log);
    }
}
