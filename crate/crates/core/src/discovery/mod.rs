//! Process discovery: trace variants, the directly-follows graph with
//! frequency and idle-time annotations, bottleneck ranking and DOT maps.

mod bottleneck;
mod dfg;
mod dot;
mod variants;

pub use bottleneck::{
    rank_bottlenecks, rank_bottlenecks_with, BottleneckReport, FlagRule, Mode, RankedEdge,
};
pub use dfg::{build_dfg, DfgEdge, DirectlyFollowsGraph, Node};
pub use dot::{export_dot, DotMode};
pub use variants::{extract_variants, Variant};
