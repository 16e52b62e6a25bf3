//! Synthetic event logs with known cluster labels and planted slow edges.
//!
//! Every draw comes from a generator seeded by `(seed, cluster, case, step)`,
//! so a spec always produces the same log.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Utc};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::MarkovChain;
use crate::error::{Error, Result};
use crate::log::{build_log, Event, EventLog};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub alphabet: Vec<String>,
    pub initial: Vec<f64>,
    pub transitions: Vec<Vec<f64>>,
    pub case_count: usize,
    /// Chance of ending the case at each step once `min_length` is reached.
    pub stop_probability: f64,
    pub min_length: usize,
    pub max_length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelaySpec {
    pub base_secs: f64,
    /// Gap is `base * (1 + jitter * u)` with `u` uniform in `[0, 1)`.
    pub jitter: f64,
}

impl Default for DelaySpec {
    fn default() -> Self {
        DelaySpec {
            base_secs: 60.0,
            jitter: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDelay {
    pub from: String,
    pub to: String,
    pub base_secs: f64,
    pub jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedBottleneck {
    pub from: String,
    pub to: String,
    pub multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub clusters: Vec<ClusterSpec>,
    /// Delay for pairs not listed in `delays`.
    #[serde(default)]
    pub default_delay: DelaySpec,
    #[serde(default)]
    pub delays: Vec<PairDelay>,
    #[serde(default)]
    pub planted_bottlenecks: Vec<PlantedBottleneck>,
}

impl GeneratorSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: GeneratorSpec =
            toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("generator spec serializes to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.clusters.is_empty() {
            return bad("no clusters".into());
        }
        for (c, cl) in self.clusters.iter().enumerate() {
            if cl.case_count == 0 {
                return bad(format!("cluster {c}: case_count must be at least 1"));
            }
            if !(cl.stop_probability > 0.0 && cl.stop_probability <= 1.0) {
                return bad(format!("cluster {c}: stop_probability must be in (0, 1]"));
            }
            if cl.min_length == 0 || cl.min_length > cl.max_length {
                return bad(format!("cluster {c}: need 1 <= min_length <= max_length"));
            }
            let names: BTreeSet<&str> = cl.alphabet.iter().map(String::as_str).collect();
            if cl.alphabet.is_empty() || names.len() != cl.alphabet.len() || names.contains("") {
                return bad(format!(
                    "cluster {c}: alphabet must be non-empty with distinct names"
                ));
            }
            self.chain(c)
                .check_stochastic(1e-6)
                .or_else(|e| bad(format!("cluster {c}: {e}")))?;
        }
        let delays = std::iter::once((self.default_delay.base_secs, self.default_delay.jitter))
            .chain(self.delays.iter().map(|d| (d.base_secs, d.jitter)));
        for (base, jitter) in delays {
            if base.is_nan() || base <= 0.0 || jitter.is_nan() || jitter < 0.0 {
                return bad(format!(
                    "delays must be positive (base {base}, jitter {jitter})"
                ));
            }
        }
        if self
            .planted_bottlenecks
            .iter()
            .any(|p| p.multiplier.is_nan() || p.multiplier <= 0.0)
        {
            return bad("planted multipliers must be positive".into());
        }
        Ok(())
    }

    fn chain(&self, c: usize) -> MarkovChain {
        MarkovChain {
            initial: self.clusters[c].initial.clone(),
            transitions: self.clusters[c].transitions.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledLog {
    pub log: EventLog,
    pub truth: BTreeMap<String, usize>,
}

fn sample(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

pub fn case_id(cluster: usize, case: usize) -> String {
    format!("k{cluster}-{case:04}")
}

pub fn generate(spec: &GeneratorSpec) -> Result<LabeledLog> {
    spec.validate()?;
    let mut delays: HashMap<(&str, &str), DelaySpec> = HashMap::new();
    for d in &spec.delays {
        delays.insert(
            (d.from.as_str(), d.to.as_str()),
            DelaySpec {
                base_secs: d.base_secs,
                jitter: d.jitter,
            },
        );
    }
    let mut multipliers: HashMap<(&str, &str), f64> = HashMap::new();
    for p in &spec.planted_bottlenecks {
        *multipliers
            .entry((p.from.as_str(), p.to.as_str()))
            .or_insert(1.0) *= p.multiplier;
    }

    let epoch = DateTime::<Utc>::UNIX_EPOCH;
    let mut events = Vec::new();
    let mut truth = BTreeMap::new();
    for (c, cl) in spec.clusters.iter().enumerate() {
        for i in 0..cl.case_count {
            let id = case_id(c, i);
            truth.insert(id.clone(), c);
            let mut rng = seed::rng(&[spec.seed, c as u64, i as u64, 0]);
            let mut state = sample(&cl.initial, rng.gen());
            let mut elapsed_ms = 0i64;
            events.push(Event::new(id.as_str(), cl.alphabet[state].as_str(), epoch)?);
            for step in 1..cl.max_length {
                let mut rng = seed::rng(&[spec.seed, c as u64, i as u64, step as u64]);
                if step >= cl.min_length && rng.gen::<f64>() < cl.stop_probability {
                    break;
                }
                let next = sample(&cl.transitions[state], rng.gen());
                let pair = (cl.alphabet[state].as_str(), cl.alphabet[next].as_str());
                let delay = delays.get(&pair).copied().unwrap_or(spec.default_delay);
                let mult = multipliers.get(&pair).copied().unwrap_or(1.0);
                let gap_secs = delay.base_secs * mult * (1.0 + delay.jitter * rng.gen::<f64>());
                elapsed_ms += (gap_secs * 1000.0).round() as i64;
                let t = epoch + chrono::Duration::milliseconds(elapsed_ms);
                events.push(Event::new(id.as_str(), pair.1, t)?);
                state = next;
            }
        }
    }
    Ok(LabeledLog {
        log: build_log(events),
        truth,
    })
}

/// Share of cases that fall in the majority truth label of their predicted
/// cluster.
pub fn purity(predicted: &BTreeMap<String, usize>, truth: &BTreeMap<String, usize>) -> Result<f64> {
    if predicted.len() != truth.len() || predicted.keys().any(|k| !truth.contains_key(k)) {
        return Err(Error::CaseSetMismatch(format!(
            "{} predicted cases vs {} labeled cases",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Ok(1.0);
    }
    let mut overlap: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (case, &p) in predicted {
        *overlap
            .entry(p)
            .or_default()
            .entry(truth[case])
            .or_default() += 1;
    }
    let majority: usize = overlap
        .values()
        .map(|m| m.values().copied().max().unwrap_or(0))
        .sum();
    Ok(majority as f64 / predicted.len() as f64)
}
