use std::collections::{BTreeMap, BTreeSet};

use chrono::SecondsFormat;
use csv::{QuoteStyle, ReaderBuilder, StringRecord, WriterBuilder};

use super::time::parse_timestamp;
use super::ParseReport;
use crate::error::{Error, Result};
use crate::log::{build_log, Event, EventLog};

/// Column layout of a CSV event log. Unmapped columns become event attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvMapping {
    pub case_column: String,
    pub activity_column: String,
    pub timestamp_column: String,
    /// `"rfc3339"` or a chrono format pattern.
    pub timestamp_format: String,
    pub delimiter: char,
}

impl Default for CsvMapping {
    fn default() -> Self {
        CsvMapping {
            case_column: "case_id".into(),
            activity_column: "activity".into(),
            timestamp_column: "timestamp".into(),
            timestamp_format: "rfc3339".into(),
            delimiter: ',',
        }
    }
}

impl CsvMapping {
    pub fn validate(&self) -> Result<()> {
        let cols = [
            &self.case_column,
            &self.activity_column,
            &self.timestamp_column,
        ];
        if cols.iter().any(|c| c.is_empty()) {
            return Err(Error::Config("CSV column names must be non-empty".into()));
        }
        if cols[0] == cols[1] || cols[0] == cols[2] || cols[1] == cols[2] {
            return Err(Error::Config(
                "CSV case/activity/timestamp columns must be distinct".into(),
            ));
        }
        if !self.delimiter.is_ascii() {
            return Err(Error::Config(format!(
                "delimiter '{}' is not a single-byte character",
                self.delimiter
            )));
        }
        Ok(())
    }
}

struct Columns {
    case: usize,
    activity: usize,
    timestamp: usize,
    extra: Vec<(usize, String)>,
}

fn locate_columns(header: &StringRecord, mapping: &CsvMapping) -> Result<Columns> {
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Config(format!("column '{name}' not found in CSV header")))
    };
    let case = find(&mapping.case_column)?;
    let activity = find(&mapping.activity_column)?;
    let timestamp = find(&mapping.timestamp_column)?;
    let extra = header
        .iter()
        .enumerate()
        .filter(|(i, _)| ![case, activity, timestamp].contains(i))
        .map(|(i, h)| (i, h.trim().to_string()))
        .collect();
    Ok(Columns {
        case,
        activity,
        timestamp,
        extra,
    })
}

fn row_to_event(
    record: &StringRecord,
    cols: &Columns,
    mapping: &CsvMapping,
) -> std::result::Result<Event, String> {
    let field = |i: usize, what: &str| {
        record
            .get(i)
            .ok_or_else(|| format!("row has {} fields, missing {what}", record.len()))
    };
    let case_id = field(cols.case, "case id")?.trim();
    let activity = field(cols.activity, "activity")?.trim();
    let raw_ts = field(cols.timestamp, "timestamp")?;
    if case_id.is_empty() {
        return Err("empty case id".into());
    }
    if activity.is_empty() {
        return Err("empty activity".into());
    }
    let timestamp = parse_timestamp(raw_ts, &mapping.timestamp_format)?;
    let attributes: BTreeMap<String, String> = cols
        .extra
        .iter()
        .filter_map(|(i, name)| {
            record
                .get(*i)
                .filter(|v| !v.is_empty())
                .map(|v| (name.clone(), v.to_string()))
        })
        .collect();
    Event::new(case_id, activity, timestamp)
        .map(|e| e.with_attributes(attributes))
        .map_err(|e| e.to_string())
}

/// Parses a CSV event log with a header row.
///
/// In strict mode the first bad row aborts with [`Error::Parse`]; otherwise bad
/// rows are counted in the report and skipped.
pub fn parse_csv(
    text: &str,
    mapping: &CsvMapping,
    strict: bool,
) -> Result<(EventLog, ParseReport)> {
    mapping.validate()?;
    let mut reader = ReaderBuilder::new()
        .delimiter(mapping.delimiter as u8)
        .flexible(true)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.is_empty() {
        return Err(Error::Config("CSV header row missing".into()));
    }
    let cols = locate_columns(&header, mapping)?;

    let mut report = ParseReport::default();
    let mut events = Vec::new();
    let mut record = StringRecord::new();
    loop {
        let outcome = reader.read_record(&mut record);
        let line = match &outcome {
            Ok(_) => record.position().map_or(0, |p| p.line()),
            Err(e) => e.position().map_or(0, |p| p.line()),
        };
        let parsed = match outcome {
            Ok(false) => break,
            Ok(true) => row_to_event(&record, &cols, mapping),
            Err(e) => Err(e.to_string()),
        };
        match parsed {
            Ok(event) => {
                report.events_parsed += 1;
                events.push(event);
            }
            Err(message) => {
                let locator = format!("line {line}");
                if strict {
                    return Err(Error::Parse { locator, message });
                }
                report.reject(locator, message);
            }
        }
    }
    Ok((build_log(events), report))
}

/// Writes `case_id,activity,timestamp` rows (RFC 3339, UTC) trace by trace.
/// Attribute keys, if any, follow as extra columns in sorted order.
pub fn write_csv(log: &EventLog) -> String {
    let keys: BTreeSet<&str> = log
        .events()
        .flat_map(|e| e.attributes.keys().map(String::as_str))
        .collect();
    let mut writer = WriterBuilder::new()
        .quote_style(QuoteStyle::Necessary)
        .from_writer(Vec::new());
    let mut header = vec!["case_id", "activity", "timestamp"];
    header.extend(keys.iter().copied());
    // writes into a Vec cannot fail
    writer.write_record(&header).expect("in-memory write");
    for e in log.events() {
        let ts = e.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true);
        let mut row = vec![e.case_id.as_str(), e.activity.as_str(), ts.as_str()];
        row.extend(
            keys.iter()
                .map(|k| e.attributes.get(*k).map_or("", String::as_str)),
        );
        writer.write_record(&row).expect("in-memory write");
    }
    let bytes = writer.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("CSV output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    #[test]
    fn minimal_file() {
        let text = "case_id,activity,timestamp\nc1,Weaving,2019-01-01T01:00:00Z\n";
        let (log, report) = parse_csv(text, &CsvMapping::default(), true).unwrap();
        assert_eq!(log.case_count(), 1);
        assert_eq!(log.event_count(), 1);
        assert_eq!(report.events_parsed, 1);
        assert_eq!(report.rows_rejected, 0);
    }

    #[test]
    fn bad_timestamp_lenient_and_strict() {
        let text = "case_id,activity,timestamp\nc1,A,not-a-date\nc1,B,2019-01-01T00:00:00Z\n";
        let (log, report) = parse_csv(text, &CsvMapping::default(), false).unwrap();
        assert_eq!(report.rows_rejected, 1);
        assert_eq!(report.events_parsed, 1);
        assert_eq!(log.event_count(), 1);
        assert_eq!(report.first_errors[0].0, "line 2");
        let err = parse_csv(text, &CsvMapping::default(), true).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn empty_fields_and_short_rows_rejected() {
        let text = "case_id,activity,timestamp\n,A,2019-01-01\nc1,,2019-01-01\nc1,A\n";
        let (log, report) = parse_csv(text, &CsvMapping::default(), false).unwrap();
        assert!(log.is_empty());
        assert_eq!(report.rows_rejected, 3);
        assert_eq!(report.events_parsed + report.rows_rejected, 3);
    }

    #[test]
    fn error_list_is_capped() {
        let mut text = String::from("case_id,activity,timestamp\n");
        for _ in 0..30 {
            text.push_str("c,A,never\n");
        }
        let (_, report) = parse_csv(&text, &CsvMapping::default(), false).unwrap();
        assert_eq!(report.rows_rejected, 30);
        assert_eq!(report.first_errors.len(), super::super::MAX_REPORTED_ERRORS);
    }

    #[test]
    fn missing_column_is_config_error() {
        let text = "case,activity,timestamp\nc1,A,2019-01-01\n";
        let err = parse_csv(text, &CsvMapping::default(), false).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let dup = CsvMapping {
            activity_column: "case_id".into(),
            ..CsvMapping::default()
        };
        assert!(dup.validate().is_err());
    }

    #[test]
    fn custom_mapping_and_delimiter() {
        let text = "Case;Act;When;Unit\n7;Weaving;01/01/2019 01:00:00;loom 3\n";
        let mapping = CsvMapping {
            case_column: "Case".into(),
            activity_column: "Act".into(),
            timestamp_column: "When".into(),
            timestamp_format: "%d/%m/%Y %H:%M:%S".into(),
            delimiter: ';',
        };
        let (log, _) = parse_csv(text, &mapping, true).unwrap();
        let e = &log.traces()[0].events()[0];
        assert_eq!(e.case_id, "7");
        assert_eq!(
            e.timestamp,
            Utc.with_ymd_and_hms(2019, 1, 1, 1, 0, 0).unwrap()
        );
        assert_eq!(e.attributes.get("Unit").map(String::as_str), Some("loom 3"));
    }

    #[test]
    fn empty_log_writes_header_only() {
        assert_eq!(
            write_csv(&EventLog::default()),
            "case_id,activity,timestamp\n"
        );
    }

    #[test]
    fn quoting() {
        let t = Utc.with_ymd_and_hms(2020, 5, 6, 7, 8, 9).unwrap();
        let log = build_log(vec![
            Event::new("c1", "cut, sew", t).unwrap(),
            Event::new("c1", "say \"hi\"", t).unwrap(),
        ]);
        let out = write_csv(&log);
        assert!(
            out.contains("c1,\"cut, sew\",2020-05-06T07:08:09Z\n"),
            "{out}"
        );
        assert!(out.contains("\"say \"\"hi\"\"\""), "{out}");
        let (back, _) = parse_csv(&out, &CsvMapping::default(), true).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn attributes_round_trip() {
        let t = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();
        let attrs: BTreeMap<String, String> = [("shift".to_string(), "night".to_string())].into();
        let log = build_log(vec![
            Event::new("c1", "A", t).unwrap().with_attributes(attrs),
            Event::new("c2", "B", t).unwrap(),
        ]);
        let (back, _) = parse_csv(&write_csv(&log), &CsvMapping::default(), true).unwrap();
        assert_eq!(back, log);
    }
}
