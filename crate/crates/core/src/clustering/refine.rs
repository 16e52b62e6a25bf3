//! Single-sequence moves between clusters, scored on exact count changes.
//!
//! For a hard partition z the add-alpha estimate maximizes
//! `sum_rows sum_j (n_j + alpha) ln p_j`, so the objective reachable from z is
//! a function of the per-cluster counts alone. Moving one sequence touches
//! only the initial row and the transition rows it leaves from.

use std::cmp::Ordering;

use super::sequence::ActivitySequence;

struct ClusterCounts {
    members: usize,
    starts: Vec<f64>,
    bigrams: Vec<Vec<f64>>,
}

fn row_score(row: &[f64], alpha: f64) -> f64 {
    let total: f64 = row.iter().sum::<f64>() + alpha * row.len() as f64;
    if total <= 0.0 {
        return 0.0;
    }
    row.iter()
        .map(|&c| c + alpha)
        .filter(|&w| w > 0.0)
        .map(|w| w * (w / total).ln())
        .sum()
}

fn counts(
    sequences: &[ActivitySequence],
    hard: &[usize],
    k: usize,
    n: usize,
) -> Vec<ClusterCounts> {
    let mut out: Vec<ClusterCounts> = (0..k)
        .map(|_| ClusterCounts {
            members: 0,
            starts: vec![0.0; n],
            bigrams: vec![vec![0.0; n]; n],
        })
        .collect();
    for (x, &c) in sequences.iter().zip(hard) {
        let Some(&first) = x.symbols.first() else {
            continue;
        };
        let cc = &mut out[c];
        cc.members += 1;
        cc.starts[first] += 1.0;
        for w in x.symbols.windows(2) {
            cc.bigrams[w[0]][w[1]] += 1.0;
        }
    }
    out
}

/// Change in the cluster's score when `x` is added (`sign = 1`) or removed (`-1`).
fn delta(cc: &ClusterCounts, x: &ActivitySequence, sign: f64, alpha: f64) -> f64 {
    let mut row = cc.starts.clone();
    row[x.symbols[0]] += sign;
    let mut d = row_score(&row, alpha) - row_score(&cc.starts, alpha);

    let mut sources: Vec<usize> = x.symbols.windows(2).map(|w| w[0]).collect();
    sources.sort_unstable();
    sources.dedup();
    for i in sources {
        let mut row = cc.bigrams[i].clone();
        for w in x.symbols.windows(2).filter(|w| w[0] == i) {
            row[w[1]] += sign;
        }
        d += row_score(&row, alpha) - row_score(&cc.bigrams[i], alpha);
    }
    d
}

/// Best strictly improving move as `(sequence index, target cluster)`.
///
/// Moves that would empty a cluster are not considered. Ties go to the
/// smallest case id, then the lowest target, so the choice does not depend
/// on sequence order.
pub(crate) fn best_move(
    sequences: &[ActivitySequence],
    hard: &[usize],
    k: usize,
    n: usize,
    alpha: f64,
    min_gain: f64,
) -> Option<(usize, usize)> {
    let clusters = counts(sequences, hard, k, n);
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, x) in sequences.iter().enumerate() {
        let from = hard[i];
        if x.symbols.is_empty() || clusters[from].members < 2 {
            continue;
        }
        let leave = delta(&clusters[from], x, -1.0, alpha);
        for to in (0..k).filter(|&c| c != from) {
            let gain = leave + delta(&clusters[to], x, 1.0, alpha);
            if gain <= min_gain {
                continue;
            }
            let better = match best {
                None => true,
                Some((g, bi, bt)) => match gain.partial_cmp(&g) {
                    Some(Ordering::Greater) => true,
                    Some(Ordering::Equal) => (&x.case_id, to) < (&sequences[bi].case_id, bt),
                    _ => false,
                },
            };
            if better {
                best = Some((gain, i, to));
            }
        }
    }
    best.map(|(_, i, to)| (i, to))
}
