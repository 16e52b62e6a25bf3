use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::log::EventLog;

/// A trace reduced to alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActivitySequence {
    pub case_id: String,
    pub symbols: Vec<usize>,
}

/// Encodes every trace against the log's own alphabet (first-appearance order).
pub fn to_sequences(log: &EventLog) -> (Vec<String>, Vec<ActivitySequence>) {
    let alphabet = log.alphabet().to_vec();
    // the log alphabet covers every activity, so encoding cannot fail
    let sequences = encode(log, &alphabet).expect("log alphabet covers its traces");
    (alphabet, sequences)
}

/// Encodes every trace against `alphabet`.
pub fn encode(log: &EventLog, alphabet: &[String]) -> Result<Vec<ActivitySequence>> {
    let index: HashMap<&str, usize> = alphabet
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    log.traces()
        .iter()
        .map(|t| {
            let symbols = t
                .activities()
                .map(|a| {
                    index.get(a).copied().ok_or_else(|| {
                        Error::Config(format!(
                            "activity '{a}' of case {} not in alphabet",
                            t.case_id()
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ActivitySequence {
                case_id: t.case_id().to_string(),
                symbols,
            })
        })
        .collect()
}
