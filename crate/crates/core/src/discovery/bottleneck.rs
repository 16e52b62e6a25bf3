use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::dfg::{DfgEdge, DirectlyFollowsGraph};
use crate::error::{Error, Result};

/// Aggregation of per-edge idle times used as the bottleneck score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Total,
    Mean,
    Max,
}

impl Mode {
    pub fn score(self, edge: &DfgEdge) -> f64 {
        match self {
            Mode::Total => edge.total_ms as f64,
            Mode::Mean => edge.mean_ms(),
            Mode::Max => edge.max_ms as f64,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Total => "total",
            Mode::Mean => "mean",
            Mode::Max => "max",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(Mode::Total),
            "mean" => Ok(Mode::Mean),
            "max" => Ok(Mode::Max),
            other => Err(Error::Config(format!("unknown bottleneck mode '{other}'"))),
        }
    }
}

/// Which ranked edges get flagged as bottlenecks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlagRule {
    /// Score at or above this percentile (0..=100, linear interpolation) of all
    /// activity-to-activity edge scores.
    Percentile(f64),
    /// Score at or above a fixed number of milliseconds.
    AtLeastMs(f64),
}

impl Default for FlagRule {
    fn default() -> Self {
        FlagRule::Percentile(95.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedEdge {
    pub from: String,
    pub to: String,
    pub frequency: u64,
    pub score_ms: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BottleneckReport {
    pub mode: Mode,
    pub threshold_ms: Option<f64>,
    pub rule: String,
    pub entries: Vec<RankedEdge>,
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = (p / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

/// Ranks activity-to-activity edges by `mode` with the default flag rule.
pub fn rank_bottlenecks(
    dfg: &DirectlyFollowsGraph,
    mode: Mode,
    top_n: usize,
) -> Result<BottleneckReport> {
    rank_bottlenecks_with(dfg, mode, top_n, FlagRule::default())
}

/// Edges sorted by score descending, then frequency descending, then
/// (from, to) ascending; truncated to `top_n`. START/END edges are excluded.
pub fn rank_bottlenecks_with(
    dfg: &DirectlyFollowsGraph,
    mode: Mode,
    top_n: usize,
    rule: FlagRule,
) -> Result<BottleneckReport> {
    if top_n == 0 {
        return Err(Error::Config("top_n must be at least 1".into()));
    }
    let mut scored: Vec<(&DfgEdge, f64)> = dfg
        .edges()
        .iter()
        .filter(|e| !e.is_synthetic())
        .map(|e| (e, mode.score(e)))
        .collect();
    scored.sort_by(|(a, sa), (b, sb)| {
        sb.partial_cmp(sa)
            .unwrap_or(Ordering::Equal)
            .then_with(|| b.frequency.cmp(&a.frequency))
            .then_with(|| (&a.from, &a.to).cmp(&(&b.from, &b.to)))
    });

    let (threshold_ms, rule) = match rule {
        FlagRule::Percentile(p) => {
            let mut scores: Vec<f64> = scored.iter().map(|(_, s)| *s).collect();
            scores.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
            let t = (!scores.is_empty()).then(|| percentile(&scores, p));
            (t, format!("score >= p{p} of {mode} edge scores"))
        }
        FlagRule::AtLeastMs(ms) => (Some(ms), format!("score >= {ms} ms")),
    };

    let entries = scored
        .into_iter()
        .take(top_n)
        .map(|(e, score)| RankedEdge {
            from: e.from.to_string(),
            to: e.to.to_string(),
            frequency: e.frequency,
            score_ms: score,
            flagged: threshold_ms.is_some_and(|t| score >= t),
        })
        .collect();
    Ok(BottleneckReport {
        mode,
        threshold_ms,
        rule,
        entries,
    })
}
