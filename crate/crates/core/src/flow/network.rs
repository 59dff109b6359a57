use std::fmt::Write as _;

use crate::graph::ComposabilityGraph;
use crate::model::Mah;

/// Node numbering: source `0`, sink `1`, then services, then requests.
pub const SOURCE: usize = 0;
pub const SINK: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRef {
    Source,
    Sink,
    Service(usize),
    Request(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub capacity: Mah,
}

/// Source/sink capacity network derived from a composability graph.
///
/// Arcs are laid out as: one `s → service` arc per service (capacity `ae`),
/// one `request → t` arc per request (capacity `re`), then one
/// `service → request` arc per graph edge, in edge order.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    graph: ComposabilityGraph,
    arcs: Vec<FlowArc>,
}

impl FlowNetwork {
    pub fn graph(&self) -> &ComposabilityGraph {
        &self.graph
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    pub fn node_count(&self) -> usize {
        if self.graph.services().is_empty() && self.graph.requests().is_empty() {
            2
        } else {
            2 + self.graph.services().len() + self.graph.requests().len()
        }
    }

    pub fn service_node(&self, i: usize) -> usize {
        2 + i
    }

    pub fn request_node(&self, j: usize) -> usize {
        2 + self.graph.services().len() + j
    }

    pub fn node(&self, idx: usize) -> NodeRef {
        let n = self.graph.services().len();
        match idx {
            SOURCE => NodeRef::Source,
            SINK => NodeRef::Sink,
            i if i < 2 + n => NodeRef::Service(i - 2),
            j => NodeRef::Request(j - 2 - n),
        }
    }

    /// Arc index of `s → service i`.
    pub fn source_arc(&self, i: usize) -> usize {
        i
    }

    /// Arc index of `request j → t`.
    pub fn sink_arc(&self, j: usize) -> usize {
        self.graph.services().len() + j
    }

    /// Arc index carrying graph edge `k`.
    pub fn edge_arc(&self, k: usize) -> usize {
        self.graph.services().len() + self.graph.requests().len() + k
    }

    pub fn label(&self, idx: usize) -> String {
        match self.node(idx) {
            NodeRef::Source => "s".to_owned(),
            NodeRef::Sink => "t".to_owned(),
            NodeRef::Service(i) => self.graph.services()[i].eid().to_string(),
            NodeRef::Request(j) => self.graph.requests()[j].rid().to_string(),
        }
    }

    /// Largest arc capacity, or 0 for an arc-less network.
    pub fn max_capacity(&self) -> Mah {
        self.arcs.iter().map(|a| a.capacity).fold(0.0, f64::max)
    }

    /// Flow dump as `from,to,flow,capacity` lines, sorted lexicographically.
    pub fn flow_dump_text(&self, flow: &[Mah]) -> String {
        let mut lines: Vec<String> = self
            .arcs
            .iter()
            .zip(flow)
            .map(|(a, f)| format!("{},{},{},{}", self.label(a.from), self.label(a.to), f, a.capacity))
            .collect();
        lines.sort();
        let mut out = String::new();
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
        out
    }
}

pub fn build_network(graph: ComposabilityGraph) -> FlowNetwork {
    let n = graph.services().len();
    let m = graph.requests().len();
    let mut arcs = Vec::with_capacity(n + m + graph.edges().len());
    for (i, s) in graph.services().iter().enumerate() {
        arcs.push(FlowArc {
            from: SOURCE,
            to: 2 + i,
            capacity: s.ae(),
        });
    }
    for (j, r) in graph.requests().iter().enumerate() {
        arcs.push(FlowArc {
            from: 2 + n + j,
            to: SINK,
            capacity: r.re(),
        });
    }
    for e in graph.edges() {
        arcs.push(FlowArc {
            from: 2 + e.service,
            to: 2 + n + e.request,
            capacity: e.weight,
        });
    }
    FlowNetwork { graph, arcs }
}
