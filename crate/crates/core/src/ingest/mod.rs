//! Event-log ingestion from CSV and MXML, and CSV output for sub-logs.

mod csv;
mod mxml;
mod time;

use serde::Serialize;

pub use self::csv::{parse_csv, write_csv, CsvMapping};
pub use self::mxml::{parse_mxml, DEFAULT_LIFECYCLE};
pub use self::time::parse_timestamp;

/// Errors kept in a [`ParseReport`]; the rest are only counted.
pub const MAX_REPORTED_ERRORS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ParseReport {
    pub events_parsed: usize,
    pub rows_rejected: usize,
    /// (locator, message) pairs for the first rejected rows.
    pub first_errors: Vec<(String, String)>,
}

impl ParseReport {
    fn reject(&mut self, locator: String, message: String) {
        self.rows_rejected += 1;
        if self.first_errors.len() < MAX_REPORTED_ERRORS {
            self.first_errors.push((locator, message));
        }
    }
}
