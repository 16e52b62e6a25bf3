//! Rendering of millisecond durations in human units.
//!
//! Conversions are fixed: a month is 30.44 days and a year 365.25 days.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;

const SEC: f64 = 1_000.0;
const MIN: f64 = 60.0 * SEC;
const HOUR: f64 = 60.0 * MIN;
const DAY: f64 = 24.0 * HOUR;
const WEEK: f64 = 7.0 * DAY;
const MONTH: f64 = 30.44 * DAY;
const YEAR: f64 = 365.25 * DAY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Auto,
    Secs,
    Mins,
    Hours,
    Days,
    Weeks,
    Months,
    Years,
}

impl Unit {
    const FIXED: [Unit; 7] = [
        Unit::Years,
        Unit::Months,
        Unit::Weeks,
        Unit::Days,
        Unit::Hours,
        Unit::Mins,
        Unit::Secs,
    ];

    fn millis(self) -> f64 {
        match self {
            Unit::Auto | Unit::Secs => SEC,
            Unit::Mins => MIN,
            Unit::Hours => HOUR,
            Unit::Days => DAY,
            Unit::Weeks => WEEK,
            Unit::Months => MONTH,
            Unit::Years => YEAR,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Unit::Auto => "auto",
            Unit::Secs => "secs",
            Unit::Mins => "mins",
            Unit::Hours => "hours",
            Unit::Days => "days",
            Unit::Weeks => "weeks",
            Unit::Months => "months",
            Unit::Years => "years",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "auto" => Unit::Auto,
            "secs" | "s" => Unit::Secs,
            "mins" | "m" => Unit::Mins,
            "hours" | "h" => Unit::Hours,
            "days" | "d" => Unit::Days,
            "weeks" | "w" => Unit::Weeks,
            "months" => Unit::Months,
            "years" | "y" => Unit::Years,
            other => return Err(Error::Config(format!("unknown unit '{other}'"))),
        })
    }
}

/// Formats `ms` in `unit` with one decimal. `Auto` picks the largest unit whose
/// value is at least 1.0 and falls back to integer milliseconds below a second.
pub fn humanize_duration(ms: f64, unit: Unit) -> String {
    let ms = ms.max(0.0);
    let unit = match unit {
        Unit::Auto => match Unit::FIXED.into_iter().find(|u| ms / u.millis() >= 1.0) {
            Some(u) => u,
            None => return format!("{} ms", ms.round() as u64),
        },
        u => u,
    };
    format!("{:.1} {}", ms / unit.millis(), unit)
}
