use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};

use crate::log::Timestamp;

const NAIVE_FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
];

/// Parses a timestamp. `format` is either `"rfc3339"` or a chrono pattern.
///
/// With `"rfc3339"`, ISO-8601 forms with a `+hhmm` offset, zone-less date-times
/// and bare dates are also accepted. Zone-less values are read as UTC.
pub fn parse_timestamp(text: &str, format: &str) -> Result<Timestamp, String> {
    let text = text.trim();
    if format.eq_ignore_ascii_case("rfc3339") {
        if let Ok(t) = DateTime::parse_from_rfc3339(text) {
            return Ok(t.with_timezone(&Utc));
        }
        if let Ok(t) = DateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S%.f%z") {
            return Ok(t.with_timezone(&Utc));
        }
        for f in NAIVE_FORMATS {
            if let Ok(t) = NaiveDateTime::parse_from_str(text, f) {
                return Ok(t.and_utc());
            }
        }
        if let Ok(d) = NaiveDate::parse_from_str(text, "%Y-%m-%d") {
            return Ok(d.and_hms_opt(0, 0, 0).unwrap().and_utc());
        }
        return Err(format!("unparseable timestamp '{text}'"));
    }
    if let Ok(t) = DateTime::parse_from_str(text, format) {
        return Ok(t.with_timezone(&Utc));
    }
    if let Ok(t) = NaiveDateTime::parse_from_str(text, format) {
        return Ok(t.and_utc());
    }
    if let Ok(d) = NaiveDate::parse_from_str(text, format) {
        return Ok(d.and_hms_opt(0, 0, 0).unwrap().and_utc());
    }
    Err(format!("timestamp '{text}' does not match '{format}'"))
}
