//! Sequence clustering with a mixture of first-order Markov chains.
//!
//! Each cluster owns one chain (initial distribution plus row-stochastic
//! transition matrix). A sequence `x0 .. x(L-1)` scores
//! `ln P(x0) + sum ln P(xi | x(i-1))` under a chain. Fitting alternates a hard
//! assignment of every sequence to its best-scoring chain with a smoothed
//! count re-estimation of each chain from its members, until the assignment
//! stops changing. Settled partitions are then polished by single-sequence
//! moves, since hard rounds alone leave a sequence in its own cluster even
//! when moving it out would raise the objective.

mod chain;
mod em;
mod refine;
mod sequence;
mod split;

pub use chain::{init_models, sequence_log_likelihood, ClusterModel, MarkovChain};
pub use em::{
    assign, fit, objective, reestimate, Assignment, ClusteringResult, FitConfig, Reestimate,
};
pub use sequence::{encode, to_sequences, ActivitySequence};
pub use split::{split_log, summarize_clusters, ClusterGroups, ClusterSummary, InstanceGroup};
