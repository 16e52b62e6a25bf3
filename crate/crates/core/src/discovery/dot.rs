use std::fmt::Write;
use std::str::FromStr;

use super::bottleneck::Mode;
use super::dfg::{DirectlyFollowsGraph, Node};
use crate::error::Error;
use crate::units::{humanize_duration, Unit};

/// What the edge labels of a process map show.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotMode {
    Frequency,
    Performance(Mode),
}

impl FromStr for DotMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frequency" => Ok(DotMode::Frequency),
            other => other.parse().map(DotMode::Performance),
        }
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

fn node_id(node: &Node) -> String {
    match node {
        Node::Start => "__start__".to_string(),
        Node::End => "__end__".to_string(),
        Node::Activity(a) => escape(a),
    }
}

/// Renders the graph as a DOT digraph. Output depends only on the graph,
/// the mode and the unit.
pub fn export_dot(dfg: &DirectlyFollowsGraph, mode: DotMode, unit: Unit) -> String {
    let mut out = String::new();
    let max_freq = dfg.max_frequency().max(1) as f64;
    // fmt::Write into a String never fails
    writeln!(out, "digraph process_map {{").unwrap();
    writeln!(out, "    graph [rankdir=TB];").unwrap();
    writeln!(
        out,
        "    node [shape=box style=rounded fontname=\"Helvetica\"];"
    )
    .unwrap();
    writeln!(out, "    \"__start__\" [label=\"START\" shape=circle];").unwrap();
    writeln!(out, "    \"__end__\" [label=\"END\" shape=doublecircle];").unwrap();
    for (activity, freq) in dfg.nodes() {
        writeln!(
            out,
            "    \"{}\" [label=\"{}\\n{}\"];",
            escape(activity),
            escape(activity),
            freq
        )
        .unwrap();
    }
    for edge in dfg.edges() {
        let label = match mode {
            DotMode::Frequency => edge.frequency.to_string(),
            DotMode::Performance(_) if edge.is_synthetic() => String::new(),
            DotMode::Performance(m) => humanize_duration(m.score(edge), unit),
        };
        let penwidth = 1.0 + 3.0 * (1.0 + edge.frequency as f64 / max_freq).log2();
        let style = if edge.is_synthetic() {
            " style=dashed"
        } else {
            ""
        };
        writeln!(
            out,
            "    \"{}\" -> \"{}\" [label=\"{}\" penwidth={:.3}{}];",
            node_id(&edge.from),
            node_id(&edge.to),
            label,
            penwidth,
            style
        )
        .unwrap();
    }
    writeln!(out, "}}").unwrap();
    out
}
