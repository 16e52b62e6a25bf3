use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use super::chain::{init_models, sequence_log_likelihood, ClusterModel, MarkovChain};
use super::refine::best_move;
use super::sequence::{encode, ActivitySequence};
use crate::error::{Error, Result};
use crate::log::EventLog;
use crate::seed;

/// Per-sequence outcome of scoring against every chain, aligned with the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Best chain per sequence; ties go to the lowest index.
    pub hard: Vec<usize>,
    /// Posterior over chains under uniform cluster priors.
    pub posteriors: Vec<Vec<f64>>,
    /// Log-likelihood under the hard-assigned chain.
    pub best_log_likelihood: Vec<f64>,
}

/// Scores every sequence under every chain and normalizes in log space.
pub fn assign(sequences: &[ActivitySequence], model: &ClusterModel) -> Result<Assignment> {
    let mut out = Assignment {
        hard: Vec::with_capacity(sequences.len()),
        posteriors: Vec::with_capacity(sequences.len()),
        best_log_likelihood: Vec::with_capacity(sequences.len()),
    };
    for x in sequences {
        let lls = model
            .chains
            .iter()
            .map(|c| sequence_log_likelihood(x, c))
            .collect::<Result<Vec<f64>>>()?;
        let mut best = 0;
        for (k, &ll) in lls.iter().enumerate() {
            if ll > lls[best] {
                best = k;
            }
        }
        let top = lls[best];
        if top == f64::NEG_INFINITY || top.is_nan() {
            return Err(Error::DegenerateAssignment(x.case_id.clone()));
        }
        let weights: Vec<f64> = lls.iter().map(|&ll| (ll - top).exp()).collect();
        let norm: f64 = weights.iter().sum();
        out.hard.push(best);
        out.posteriors
            .push(weights.into_iter().map(|w| w / norm).collect());
        out.best_log_likelihood.push(top);
    }
    Ok(out)
}

/// Sum of best-chain log-likelihoods plus `alpha` times the log-parameter sum
/// of every chain. This is the quantity that assignment and add-alpha
/// re-estimation each maximize, so it never decreases across a round unless
/// an empty cluster is reseeded.
pub fn objective(assignment: &Assignment, model: &ClusterModel) -> f64 {
    let data: f64 = assignment.best_log_likelihood.iter().sum();
    if model.alpha == 0.0 {
        return data;
    }
    let prior: f64 = model
        .chains
        .iter()
        .map(MarkovChain::log_parameter_sum)
        .sum();
    data + model.alpha * prior
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reestimate {
    pub model: ClusterModel,
    /// Clusters with no members, replaced by a fresh random chain.
    pub reseeded: Vec<usize>,
}

fn normalize_counts(counts: &[f64], alpha: f64) -> Vec<f64> {
    let n = counts.len() as f64;
    let total: f64 = counts.iter().sum::<f64>() + alpha * n;
    if total > 0.0 {
        counts.iter().map(|c| (c + alpha) / total).collect()
    } else {
        vec![1.0 / n; counts.len()]
    }
}

/// Add-alpha count estimate of each chain from the sequences assigned to it.
/// A row with no observations and `alpha = 0` becomes uniform. A cluster with
/// no members is redrawn from a generator seeded by `(reseed, cluster)`.
pub fn reestimate(
    sequences: &[ActivitySequence],
    hard: &[usize],
    alphabet: &[String],
    k: usize,
    alpha: f64,
    reseed: u64,
) -> Result<Reestimate> {
    let n = alphabet.len();
    if hard.len() != sequences.len() {
        return Err(Error::Invariant(format!(
            "{} assignments for {} sequences",
            hard.len(),
            sequences.len()
        )));
    }
    let mut starts = vec![vec![0.0f64; n]; k];
    let mut bigrams = vec![vec![vec![0.0f64; n]; n]; k];
    let mut members = vec![0usize; k];
    for (x, &c) in sequences.iter().zip(hard) {
        if c >= k {
            return Err(Error::Invariant(format!(
                "assignment to cluster {c} with k = {k}"
            )));
        }
        if let Some(&bad) = x.symbols.iter().find(|&&s| s >= n) {
            return Err(Error::SymbolOutOfAlphabet {
                symbol: bad,
                size: n,
            });
        }
        let Some(&first) = x.symbols.first() else {
            continue;
        };
        members[c] += 1;
        starts[c][first] += 1.0;
        for w in x.symbols.windows(2) {
            bigrams[c][w[0]][w[1]] += 1.0;
        }
    }

    let mut reseeded = Vec::new();
    let chains = (0..k)
        .map(|c| {
            if members[c] == 0 {
                reseeded.push(c);
                return MarkovChain::random(n, &[reseed, c as u64]);
            }
            MarkovChain {
                initial: normalize_counts(&starts[c], alpha),
                transitions: bigrams[c]
                    .iter()
                    .map(|row| normalize_counts(row, alpha))
                    .collect(),
            }
        })
        .collect();
    Ok(Reestimate {
        model: ClusterModel {
            alphabet: alphabet.to_vec(),
            chains,
            alpha,
        },
        reseeded,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub k: usize,
    pub seed: u64,
    pub alpha: f64,
    pub max_iter: usize,
    /// Stop once the relative objective change falls below this.
    pub tol: f64,
    pub restarts: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            k: 2,
            seed: 0,
            alpha: 0.01,
            max_iter: 100,
            tol: 1e-6,
            restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringResult {
    pub model: ClusterModel,
    pub hard_assignment: BTreeMap<String, usize>,
    /// Posterior per cluster index, for every case.
    pub memberships: BTreeMap<String, Vec<f64>>,
    /// Objective after initialization and after every round of the winning restart.
    pub objective_trace: Vec<f64>,
    /// Sum of best-chain log-likelihoods at the end, without the parameter term.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Rounds (1-based) in which an empty cluster was redrawn.
    pub reseeded_rounds: Vec<usize>,
    pub seed: u64,
    pub restarts: usize,
    pub winning_restart: usize,
}

impl ClusteringResult {
    pub fn k(&self) -> usize {
        self.model.k()
    }
}

struct Run {
    model: ClusterModel,
    assignment: Assignment,
    trace: Vec<f64>,
    iterations: usize,
    converged: bool,
    reseeded_rounds: Vec<usize>,
}

fn run_restart(
    sequences: &[ActivitySequence],
    alphabet: &[String],
    cfg: &FitConfig,
    restart_seed: u64,
) -> Result<Run> {
    let mut model = init_models(alphabet, cfg.k, restart_seed)?;
    model.alpha = cfg.alpha;
    let assignment = assign(sequences, &model)?;
    let obj = objective(&assignment, &model);
    let mut run = Run {
        model,
        assignment,
        trace: vec![obj],
        iterations: 0,
        converged: false,
        reseeded_rounds: Vec::new(),
    };
    // the partition to re-estimate from next; differs from the current
    // assignment only right after a move
    let mut partition = run.assignment.hard.clone();
    while run.iterations < cfg.max_iter {
        run.iterations += 1;
        let round_seed = seed::derive(&[restart_seed, run.iterations as u64]);
        let re = reestimate(
            sequences, &partition, alphabet, cfg.k, cfg.alpha, round_seed,
        )?;
        let assignment = assign(sequences, &re.model)?;
        let prev = *run.trace.last().unwrap();
        let next = objective(&assignment, &re.model);
        let stable = assignment.hard == partition;
        let rel = (next - prev).abs() / prev.abs().max(f64::MIN_POSITIVE);
        if !re.reseeded.is_empty() {
            run.reseeded_rounds.push(run.iterations);
        }
        let settled = re.reseeded.is_empty() && rel < cfg.tol;
        run.model = re.model;
        run.assignment = assignment;
        run.trace.push(next);
        partition = run.assignment.hard.clone();
        run.converged = false;
        if stable || settled {
            run.converged = true;
            let min_gain = 1e-10 * next.abs().max(1.0);
            match best_move(
                sequences,
                &partition,
                cfg.k,
                alphabet.len(),
                cfg.alpha,
                min_gain,
            ) {
                Some((i, to)) => partition[i] = to,
                None => break,
            }
        }
    }
    Ok(run)
}

/// Fits a K-chain mixture to the log's traces by hard EM with restarts.
///
/// Whenever the assignment settles, the single-sequence move between clusters
/// that most raises the objective is applied and the rounds resume; a restart
/// ends when no such move is left or `max_iter` rounds have run.
///
/// The alphabet is the sorted set of activities, so the fit does not depend
/// on trace order. Restart `r` is seeded by `(seed, r)`; the restart with the
/// highest final objective wins, earlier restarts winning ties.
pub fn fit(log: &EventLog, cfg: &FitConfig) -> Result<ClusteringResult> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    if cfg.k == 0
        || cfg.restarts == 0
        || cfg.alpha.is_nan()
        || cfg.alpha < 0.0
        || cfg.tol.is_nan()
        || cfg.tol < 0.0
    {
        return Err(Error::Config(format!(
            "invalid clustering parameters: k={}, restarts={}, alpha={}, tol={}",
            cfg.k, cfg.restarts, cfg.alpha, cfg.tol
        )));
    }
    let alphabet: Vec<String> = log
        .alphabet()
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let sequences = encode(log, &alphabet)?;

    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            run_restart(
                &sequences,
                &alphabet,
                cfg,
                seed::derive(&[cfg.seed, r as u64]),
            )
        })
        .collect::<Result<_>>()?;

    // float sums may differ in the last bits between equivalent optima
    let mut winner = 0;
    for (r, run) in runs.iter().enumerate().skip(1) {
        let best = *runs[winner].trace.last().unwrap();
        let candidate = *run.trace.last().unwrap();
        if candidate > best + 1e-9 * best.abs().max(1.0) {
            winner = r;
        }
    }
    let run = runs.into_iter().nth(winner).unwrap();

    let mut hard_assignment = BTreeMap::new();
    let mut memberships = BTreeMap::new();
    for (i, x) in sequences.iter().enumerate() {
        hard_assignment.insert(x.case_id.clone(), run.assignment.hard[i]);
        memberships.insert(x.case_id.clone(), run.assignment.posteriors[i].clone());
    }
    Ok(ClusteringResult {
        log_likelihood: run.assignment.best_log_likelihood.iter().sum(),
        model: run.model,
        hard_assignment,
        memberships,
        objective_trace: run.trace,
        iterations: run.iterations,
        converged: run.converged,
        reseeded_rounds: run.reseeded_rounds,
        seed: cfg.seed,
        restarts: cfg.restarts,
        winning_restart: winner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::{build_log, Event};
    use chrono::{TimeZone, Utc};

    fn seq(id: &str, symbols: &[usize]) -> ActivitySequence {
        ActivitySequence {
            case_id: id.into(),
            symbols: symbols.to_vec(),
        }
    }

    fn names(n: usize) -> Vec<String> {
        (0..n)
            .map(|i| ((b'A' + i as u8) as char).to_string())
            .collect()
    }

    fn log_of(cases: &[(&str, &str)]) -> EventLog {
        build_log(cases.iter().flat_map(|(id, acts)| {
            acts.chars().enumerate().map(move |(i, a)| {
                Event::new(*id, a.to_string(), Utc.timestamp_opt(i as i64, 0).unwrap()).unwrap()
            })
        }))
    }

    #[test]
    fn identical_chains_tie_to_lowest_index() {
        let chain = MarkovChain::random(2, &[1]);
        let model = ClusterModel {
            alphabet: names(2),
            chains: vec![chain.clone(), chain],
            alpha: 0.0,
        };
        let a = assign(&[seq("a", &[0, 1]), seq("b", &[1])], &model).unwrap();
        assert_eq!(a.hard, [0, 0]);
        for p in &a.posteriors {
            assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn disjoint_supports() {
        let c0 = MarkovChain {
            initial: vec![1.0, 0.0],
            transitions: vec![vec![1.0, 0.0], vec![1.0, 0.0]],
        };
        let c1 = MarkovChain {
            initial: vec![0.0, 1.0],
            transitions: vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        };
        let model = ClusterModel {
            alphabet: names(2),
            chains: vec![c0, c1],
            alpha: 0.0,
        };
        let a = assign(&[seq("x", &[1, 1, 1]), seq("y", &[1])], &model).unwrap();
        assert_eq!(a.hard, [1, 1]);
        assert_eq!(a.posteriors[0], [0.0, 1.0]);

        let err = assign(&[seq("z", &[0, 1])], &model).unwrap_err();
        assert!(matches!(err, Error::DegenerateAssignment(ref c) if c == "z"));
    }

    #[test]
    fn posterior_normalization() {
        // one-symbol chains whose initial terms are 0.2 and 0.6
        let chain = |p: f64| MarkovChain {
            initial: vec![p, 1.0 - p],
            transitions: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        };
        let model = ClusterModel {
            alphabet: names(2),
            chains: vec![chain(0.2), chain(0.6)],
            alpha: 0.0,
        };
        let a = assign(&[seq("c", &[0])], &model).unwrap();
        assert!((a.posteriors[0][0] - 0.25).abs() < 1e-12);
        assert!((a.posteriors[0][1] - 0.75).abs() < 1e-12);
        assert_eq!(a.hard, [1]);
    }

    #[test]
    fn unsmoothed_counts() {
        // A=0, B=1, C=2
        let seqs = [seq("1", &[0, 1]), seq("2", &[0, 2])];
        let re = reestimate(&seqs, &[0, 0], &names(3), 1, 0.0, 0).unwrap();
        let c = &re.model.chains[0];
        assert_eq!(c.initial, [1.0, 0.0, 0.0]);
        assert_eq!(c.transitions[0], [0.0, 0.5, 0.5]);
        // unobserved rows fall back to uniform
        assert_eq!(c.transitions[1], [1.0 / 3.0; 3]);
        assert!(re.reseeded.is_empty());
    }

    #[test]
    fn smoothed_counts() {
        // row 0 observes 0->1 once and 0->2 once; (1 + 1) / (2 + 3)
        let seqs = [seq("1", &[0, 1]), seq("2", &[0, 2])];
        let re = reestimate(&seqs, &[0, 0], &names(3), 1, 1.0, 0).unwrap();
        let c = &re.model.chains[0];
        assert!((c.transitions[0][1] - 0.4).abs() < 1e-15);
        assert!((c.transitions[0][0] - 0.2).abs() < 1e-15);
        // both sequences start with A: (2 + 1) / (2 + 3)
        assert!((c.initial[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn empty_cluster_is_reseeded_deterministically() {
        let seqs = [seq("1", &[0, 1])];
        let a = reestimate(&seqs, &[0], &names(2), 3, 0.01, 99).unwrap();
        assert_eq!(a.reseeded, [1, 2]);
        for c in &a.model.chains {
            c.check_stochastic(1e-9).unwrap();
        }
        assert_eq!(a, reestimate(&seqs, &[0], &names(2), 3, 0.01, 99).unwrap());
    }

    #[test]
    fn bad_assignment_rejected() {
        let seqs = [seq("1", &[0])];
        assert!(reestimate(&seqs, &[2], &names(1), 2, 0.0, 0).is_err());
        assert!(reestimate(&seqs, &[], &names(1), 2, 0.0, 0).is_err());
    }

    #[test]
    fn single_cluster_converges_immediately() {
        let log = log_of(&[("1", "ABAB"), ("2", "ABC"), ("3", "CAB")]);
        let cfg = FitConfig {
            k: 1,
            ..FitConfig::default()
        };
        let r = fit(&log, &cfg).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 2);
        assert!(r.hard_assignment.values().all(|&c| c == 0));

        // objective = smoothed one-chain fit of all sequences plus alpha * sum ln p
        let alphabet = names(3);
        let seqs = encode(&log, &alphabet).unwrap();
        let one = reestimate(&seqs, &[0, 0, 0], &alphabet, 1, 0.01, 0)
            .unwrap()
            .model;
        let lls: f64 = seqs
            .iter()
            .map(|s| sequence_log_likelihood(s, &one.chains[0]).unwrap())
            .sum();
        let want = lls + 0.01 * one.chains[0].log_parameter_sum();
        assert!((r.objective_trace.last().unwrap() - want).abs() < 1e-9);
        assert!((r.log_likelihood - lls).abs() < 1e-9);
    }

    #[test]
    fn fit_is_deterministic() {
        let log = log_of(&[
            ("1", "ABAB"),
            ("2", "ABA"),
            ("3", "CDCD"),
            ("4", "CDC"),
            ("5", "ABCD"),
        ]);
        let cfg = FitConfig {
            k: 2,
            seed: 7,
            ..FitConfig::default()
        };
        assert_eq!(fit(&log, &cfg).unwrap(), fit(&log, &cfg).unwrap());
    }

    #[test]
    fn fit_preconditions() {
        assert!(matches!(
            fit(&EventLog::default(), &FitConfig::default()),
            Err(Error::EmptyLog)
        ));
        let log = log_of(&[("1", "AB")]);
        for cfg in [
            FitConfig {
                k: 0,
                ..FitConfig::default()
            },
            FitConfig {
                restarts: 0,
                ..FitConfig::default()
            },
            FitConfig {
                alpha: -1.0,
                ..FitConfig::default()
            },
        ] {
            assert!(matches!(fit(&log, &cfg), Err(Error::Config(_))));
        }
    }
}
