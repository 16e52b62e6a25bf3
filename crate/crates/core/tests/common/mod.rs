#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::{DateTime, Duration, TimeZone, Utc};
use procmine::{log::build_log, Event, EventLog};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).expect("fixture readable")
}

pub fn epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 3, 1, 8, 0, 0).unwrap()
}

/// Random log: `cases` traces over `activities`, gaps of 0..=gap_ms.
pub fn random_log(
    rng: &mut ChaCha8Rng,
    cases: usize,
    activities: &[&str],
    max_len: usize,
    gap_ms: i64,
) -> EventLog {
    let mut events = Vec::new();
    for c in 0..cases {
        let len = rng.gen_range(1..=max_len);
        let mut t = epoch() + Duration::milliseconds(rng.gen_range(0..=gap_ms * 10));
        for _ in 0..len {
            let a = activities[rng.gen_range(0..activities.len())];
            events.push(Event::new(format!("case{c}"), a, t).unwrap());
            t += Duration::milliseconds(rng.gen_range(0..=gap_ms));
        }
    }
    build_log(events)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Log with one case per sequence, one minute between events.
pub fn log_from_sequences(seqs: &[Vec<&str>]) -> EventLog {
    let mut events = Vec::new();
    for (i, s) in seqs.iter().enumerate() {
        for (j, a) in s.iter().enumerate() {
            let t = epoch() + Duration::minutes(j as i64);
            events.push(Event::new(format!("s{i:02}"), *a, t).unwrap());
        }
    }
    build_log(events)
}

/// Directly-follows counts recomputed from raw traces.
pub fn recount_pairs(log: &EventLog) -> BTreeMap<(String, String), Vec<i64>> {
    let mut out: BTreeMap<(String, String), Vec<i64>> = BTreeMap::new();
    for t in log.traces() {
        for w in t.events().windows(2) {
            let gap = (w[1].timestamp - w[0].timestamp).num_milliseconds();
            out.entry((w[0].activity.clone(), w[1].activity.clone()))
                .or_default()
                .push(gap);
        }
    }
    out
}

/// Add-alpha estimate of one chain from integer sequences.
pub fn smoothed_chain(seqs: &[&Vec<usize>], m: usize, alpha: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut init = vec![0.0; m];
    let mut trans = vec![vec![0.0; m]; m];
    for s in seqs {
        init[s[0]] += 1.0;
        for w in s.windows(2) {
            trans[w[0]][w[1]] += 1.0;
        }
    }
    let norm = |row: &mut Vec<f64>| {
        let n: f64 = row.iter().sum();
        let d = n + alpha * m as f64;
        for v in row.iter_mut() {
            *v = if d > 0.0 {
                (*v + alpha) / d
            } else {
                1.0 / m as f64
            };
        }
    };
    norm(&mut init);
    for row in trans.iter_mut() {
        norm(row);
    }
    (init, trans)
}

pub fn chain_ll(s: &[usize], init: &[f64], trans: &[Vec<f64>]) -> f64 {
    let mut ll = init[s[0]].ln();
    for w in s.windows(2) {
        ll += trans[w[0]][w[1]].ln();
    }
    ll
}
