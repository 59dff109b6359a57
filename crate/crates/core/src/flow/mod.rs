//! Capacity networks, maximum flow, and the allocation strategies built on them.

mod allocate;
mod greedy;
mod network;
mod push_relabel;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use allocate::{check_flow, extract_allocation, verify_result};
pub use greedy::{compose_baseline_fcfs, compose_priority, greedy_amounts, GreedyOptions, RequestOrder, ServiceOrder};
pub use network::{build_network, FlowArc, FlowNetwork, NodeRef, SINK, SOURCE};
pub use push_relabel::{max_flow, push_relabel, tolerance, FlowAssignment, REL_TOL};

use crate::error::Result;
use crate::graph::{build_bipartite, build_partial_bipartite, ComposabilityGraph};
use crate::model::{CompositionResult, CompositionWindow, EnergyRequest, EnergyService, Mode};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComposeOptions {
    pub greedy: GreedyOptions,
}

/// The graph a mode composes over: partial for `PartialFlow`, strict otherwise.
pub fn graph_for_mode(
    services: &[EnergyService],
    requests: &[EnergyRequest],
    window: CompositionWindow,
    mode: Mode,
) -> ComposabilityGraph {
    match mode {
        Mode::PartialFlow => build_partial_bipartite(services, requests, window),
        Mode::Baseline | Mode::Priority | Mode::Flow => build_bipartite(services, requests, window),
    }
}

/// Runs one composition end to end: graph, network, solve, allocate.
/// The recorded elapsed time covers all four steps.
pub fn compose(
    services: &[EnergyService],
    requests: &[EnergyRequest],
    window: CompositionWindow,
    mode: Mode,
) -> Result<CompositionResult> {
    compose_with(services, requests, window, mode, ComposeOptions::default())
}

pub fn compose_with(
    services: &[EnergyService],
    requests: &[EnergyRequest],
    window: CompositionWindow,
    mode: Mode,
    opts: ComposeOptions,
) -> Result<CompositionResult> {
    let start = Instant::now();
    let network = build_network(graph_for_mode(services, requests, window, mode));
    let amounts = match mode {
        Mode::Flow | Mode::PartialFlow => {
            let fa = max_flow(&network);
            check_flow(&network, &fa)?;
            let tol = tolerance(network.max_capacity());
            (0..network.graph().edges().len())
                .map(|k| fa.on_arc(network.edge_arc(k)))
                .map(|f| if f > tol { f } else { 0.0 })
                .collect()
        }
        Mode::Baseline => greedy_amounts(&network, RequestOrder::StartTime, opts.greedy),
        Mode::Priority => greedy_amounts(&network, RequestOrder::LargestFirst, opts.greedy),
    };
    let elapsed = start.elapsed();
    allocate::assemble(network.graph(), &amounts, mode, window, elapsed)
}
