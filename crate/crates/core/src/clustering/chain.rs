use rand::Rng;
use serde::Serialize;

use super::sequence::ActivitySequence;
use crate::error::{Error, Result};
use crate::seed;

/// First-order Markov chain over alphabet indices `0..n`.
/// `transitions[i][j]` is the probability of `j` directly after `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovChain {
    pub initial: Vec<f64>,
    pub transitions: Vec<Vec<f64>>,
}

impl MarkovChain {
    pub fn size(&self) -> usize {
        self.initial.len()
    }

    /// Draws every row from a flat Dirichlet. Row 0 of the stream is the
    /// initial vector, row `i + 1` is transition row `i`.
    pub fn random(size: usize, seed_parts: &[u64]) -> Self {
        let row = |r: u64| {
            let mut parts = seed_parts.to_vec();
            parts.push(r);
            flat_dirichlet(size, &parts)
        };
        MarkovChain {
            initial: row(0),
            transitions: (0..size).map(|i| row(i as u64 + 1)).collect(),
        }
    }

    /// `sum ln p` over every parameter; the log density of the symmetric
    /// Dirichlet prior that add-alpha estimation maximizes, up to `alpha` and a constant.
    pub fn log_parameter_sum(&self) -> f64 {
        self.initial
            .iter()
            .chain(self.transitions.iter().flatten())
            .map(|p| p.ln())
            .sum()
    }

    pub fn check_stochastic(&self, tol: f64) -> Result<()> {
        let n = self.size();
        let rows = std::iter::once(&self.initial).chain(self.transitions.iter());
        if self.transitions.len() != n {
            return Err(Error::Invariant(format!(
                "transition matrix has {} rows for alphabet of {n}",
                self.transitions.len()
            )));
        }
        for (r, row) in rows.enumerate() {
            if row.len() != n {
                return Err(Error::Invariant(format!(
                    "row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::Invariant(format!(
                    "row {r} has an entry outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::Invariant(format!("row {r} sums to {sum}")));
            }
        }
        Ok(())
    }
}

fn flat_dirichlet(size: usize, parts: &[u64]) -> Vec<f64> {
    let mut rng = seed::rng(parts);
    // normalized unit exponentials
    let draws: Vec<f64> = (0..size).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 {
        draws.into_iter().map(|d| d / total).collect()
    } else {
        vec![1.0 / size as f64; size]
    }
}

/// K chains over one shared alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterModel {
    pub alphabet: Vec<String>,
    pub chains: Vec<MarkovChain>,
    pub alpha: f64,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.chains.len()
    }
}

/// Random starting model: chain `k`, row `r` is drawn from a generator seeded
/// by `(seed, k, r)`.
pub fn init_models(alphabet: &[String], k: usize, seed: u64) -> Result<ClusterModel> {
    if k == 0 {
        return Err(Error::Config("cluster count must be at least 1".into()));
    }
    if alphabet.is_empty() {
        return Err(Error::Config("alphabet is empty".into()));
    }
    Ok(ClusterModel {
        alphabet: alphabet.to_vec(),
        chains: (0..k)
            .map(|c| MarkovChain::random(alphabet.len(), &[seed, c as u64]))
            .collect(),
        alpha: 0.0,
    })
}

/// `ln P(x0) + sum ln P(xi | x(i-1))` under the stored parameters. Zero
/// probabilities give negative infinity.
pub fn sequence_log_likelihood(x: &ActivitySequence, chain: &MarkovChain) -> Result<f64> {
    let n = chain.size();
    if let Some(&bad) = x.symbols.iter().find(|&&s| s >= n) {
        return Err(Error::SymbolOutOfAlphabet {
            symbol: bad,
            size: n,
        });
    }
    let Some(&first) = x.symbols.first() else {
        return Ok(0.0);
    };
    let mut ll = chain.initial[first].ln();
    for w in x.symbols.windows(2) {
        ll += chain.transitions[w[0]][w[1]].ln();
    }
    Ok(ll)
}
