use serde::Serialize;

use super::em::ClusteringResult;
use crate::discovery::extract_variants;
use crate::error::{Error, Result};
use crate::log::{build_log, EventLog};

/// One sub-log per cluster.
///
/// Without `tau` every case goes to its hard cluster only, so the sub-logs
/// partition the cases. With `tau` a case is also copied into every cluster
/// whose posterior is at least `tau`, and the sub-logs may overlap.
pub fn split_log(
    log: &EventLog,
    result: &ClusteringResult,
    tau: Option<f64>,
) -> Result<Vec<EventLog>> {
    if let Some(t) = tau {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidThreshold(t));
        }
    }
    let k = result.k();
    let mut buckets: Vec<Vec<_>> = vec![Vec::new(); k];
    for trace in log.traces() {
        let id = trace.case_id();
        let hard = *result.hard_assignment.get(id).ok_or_else(|| {
            Error::CaseSetMismatch(format!("case {id} has no cluster assignment"))
        })?;
        if hard >= k {
            return Err(Error::Invariant(format!(
                "case {id} assigned to cluster {hard} of {k}"
            )));
        }
        let posteriors = result.memberships.get(id).map(Vec::as_slice).unwrap_or(&[]);
        for (c, bucket) in buckets.iter_mut().enumerate() {
            let over = tau.is_some_and(|t| posteriors.get(c).is_some_and(|&p| p >= t));
            if c == hard || over {
                bucket.extend(trace.events().iter().cloned());
            }
        }
    }
    Ok(buckets.into_iter().map(build_log).collect())
}

/// Cases of one cluster that share an activity sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceGroup {
    pub case_count: usize,
    pub case_ids: Vec<String>,
    pub events_per_case: usize,
    pub max_case_duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterGroups {
    pub cases: usize,
    pub events: usize,
    pub groups: Vec<InstanceGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub clusters: Vec<ClusterGroups>,
}

/// Instance table per cluster: groups sorted by case count, then by maximum
/// case duration, both descending.
pub fn summarize_clusters(sub_logs: &[EventLog]) -> ClusterSummary {
    let clusters = sub_logs
        .iter()
        .map(|log| {
            let mut groups: Vec<InstanceGroup> = extract_variants(log)
                .into_iter()
                .map(|v| InstanceGroup {
                    case_count: v.case_count,
                    events_per_case: v.sequence.len(),
                    case_ids: v.case_ids,
                    max_case_duration_ms: v.max_case_duration_ms,
                })
                .collect();
            groups.sort_by(|a, b| {
                b.case_count
                    .cmp(&a.case_count)
                    .then(b.max_case_duration_ms.cmp(&a.max_case_duration_ms))
            });
            ClusterGroups {
                cases: log.case_count(),
                events: log.event_count(),
                groups,
            }
        })
        .collect();
    ClusterSummary { clusters }
}
