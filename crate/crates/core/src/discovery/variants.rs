use std::collections::HashMap;

use serde::Serialize;

use crate::log::{median, EventLog};

/// Cases sharing one exact activity sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variant {
    pub sequence: Vec<String>,
    pub case_ids: Vec<String>,
    pub case_count: usize,
    pub min_case_duration_ms: u64,
    pub median_case_duration_ms: f64,
    pub max_case_duration_ms: u64,
}

/// Groups cases by activity sequence. Variants are ordered by case count,
/// descending; ties keep the order in which each variant's first case appears.
pub fn extract_variants(log: &EventLog) -> Vec<Variant> {
    let mut index: HashMap<Vec<&str>, usize> = HashMap::new();
    let mut groups: Vec<(Vec<&str>, Vec<usize>)> = Vec::new();
    for (i, trace) in log.traces().iter().enumerate() {
        let seq: Vec<&str> = trace.activities().collect();
        match index.get(&seq) {
            Some(&g) => groups[g].1.push(i),
            None => {
                index.insert(seq.clone(), groups.len());
                groups.push((seq, vec![i]));
            }
        }
    }

    let traces = log.traces();
    let mut variants: Vec<Variant> = groups
        .into_iter()
        .map(|(seq, members)| {
            let mut durations: Vec<u64> =
                members.iter().map(|&i| traces[i].duration_ms()).collect();
            durations.sort_unstable();
            Variant {
                sequence: seq.into_iter().map(String::from).collect(),
                case_ids: members
                    .iter()
                    .map(|&i| traces[i].case_id().to_string())
                    .collect(),
                case_count: members.len(),
                min_case_duration_ms: durations[0],
                median_case_duration_ms: median(&durations),
                max_case_duration_ms: *durations.last().unwrap(),
            }
        })
        .collect();
    // stable: ties stay in first-appearance order
    variants.sort_by_key(|v| std::cmp::Reverse(v.case_count));
    variants
}
