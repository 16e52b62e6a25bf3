use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::log::{span_ms, EventLog};

/// Graph endpoint. `Start` sorts before every activity and `End` after.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Start,
    Activity(String),
    End,
}

impl Node {
    pub fn is_synthetic(&self) -> bool {
        !matches!(self, Node::Activity(_))
    }

    pub fn activity(&self) -> Option<&str> {
        match self {
            Node::Activity(a) => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Start => f.write_str("START"),
            Node::End => f.write_str("END"),
            Node::Activity(a) => f.write_str(a),
        }
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Directly-follows relation with idle-time statistics. Edges touching
/// `Start` or `End` carry zero durations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DfgEdge {
    pub from: Node,
    pub to: Node,
    pub frequency: u64,
    pub total_ms: u64,
    pub min_ms: u64,
    pub max_ms: u64,
}

impl DfgEdge {
    pub fn mean_ms(&self) -> f64 {
        self.total_ms as f64 / self.frequency as f64
    }

    pub fn is_synthetic(&self) -> bool {
        self.from.is_synthetic() || self.to.is_synthetic()
    }

    fn observe(&mut self, gap: u64) {
        if self.frequency == 0 {
            self.min_ms = gap;
            self.max_ms = gap;
        } else {
            self.min_ms = self.min_ms.min(gap);
            self.max_ms = self.max_ms.max(gap);
        }
        self.frequency += 1;
        self.total_ms += gap;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DirectlyFollowsGraph {
    nodes: BTreeMap<String, u64>,
    edges: Vec<DfgEdge>,
    trace_count: u64,
}

impl DirectlyFollowsGraph {
    /// Activity nodes with their absolute frequencies, sorted by name.
    pub fn nodes(&self) -> &BTreeMap<String, u64> {
        &self.nodes
    }

    /// All edges, sorted by (from, to).
    pub fn edges(&self) -> &[DfgEdge] {
        &self.edges
    }

    pub fn edge(&self, from: &Node, to: &Node) -> Option<&DfgEdge> {
        self.edges
            .binary_search_by(|e| (&e.from, &e.to).cmp(&(from, to)))
            .ok()
            .map(|i| &self.edges[i])
    }

    pub fn trace_count(&self) -> u64 {
        self.trace_count
    }

    pub fn max_frequency(&self) -> u64 {
        self.edges.iter().map(|e| e.frequency).max().unwrap_or(0)
    }
}

pub fn build_dfg(log: &EventLog) -> DirectlyFollowsGraph {
    let mut nodes: BTreeMap<String, u64> = BTreeMap::new();
    let mut edges: BTreeMap<(Node, Node), DfgEdge> = BTreeMap::new();
    let mut bump = |from: Node, to: Node, gap: u64| {
        edges
            .entry((from.clone(), to.clone()))
            .or_insert(DfgEdge {
                from,
                to,
                frequency: 0,
                total_ms: 0,
                min_ms: 0,
                max_ms: 0,
            })
            .observe(gap)
    };

    for trace in log.traces() {
        let events = trace.events();
        for e in events {
            *nodes.entry(e.activity.clone()).or_default() += 1;
        }
        let (Some(first), Some(last)) = (events.first(), events.last()) else {
            continue;
        };
        bump(Node::Start, Node::Activity(first.activity.clone()), 0);
        for pair in events.windows(2) {
            bump(
                Node::Activity(pair[0].activity.clone()),
                Node::Activity(pair[1].activity.clone()),
                span_ms(pair[0].timestamp, pair[1].timestamp),
            );
        }
        bump(Node::Activity(last.activity.clone()), Node::End, 0);
    }

    DirectlyFollowsGraph {
        nodes,
        edges: edges.into_values().collect(),
        trace_count: log.case_count() as u64,
    }
}
