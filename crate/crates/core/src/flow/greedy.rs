//! Greedy baselines that walk requests in a fixed order and fill each one
//! from its neighbouring services.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::allocate::assemble;
use super::network::FlowNetwork;
use super::push_relabel::tolerance;
use crate::error::Result;
use crate::model::{CompositionResult, CompositionWindow, Mah, Mode};

/// Order in which a request visits its composable services.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceOrder {
    /// Ascending service start time, ties by eid.
    #[default]
    StartTime,
    /// Descending advertised energy, ties by eid.
    LargestSupply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GreedyOptions {
    pub service_order: ServiceOrder,
    /// When false a request draws from at most one service.
    pub allow_split: bool,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self {
            service_order: ServiceOrder::StartTime,
            allow_split: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequestOrder {
    /// Ascending `(st, rid)`.
    StartTime,
    /// Descending `re`, ties by ascending `rid`.
    LargestFirst,
}

/// Per-edge amounts (aligned with the graph's edges) chosen by the greedy pass.
pub fn greedy_amounts(network: &FlowNetwork, order: RequestOrder, opts: GreedyOptions) -> Vec<Mah> {
    let graph = network.graph();
    let services = graph.services();
    let requests = graph.requests();
    let tol = tolerance(network.max_capacity());

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); requests.len()];
    for (k, e) in graph.edges().iter().enumerate() {
        incident[e.request].push(k);
    }
    for list in &mut incident {
        list.sort_by(|&a, &b| {
            let (sa, sb) = (&services[graph.edges()[a].service], &services[graph.edges()[b].service]);
            match opts.service_order {
                ServiceOrder::StartTime => (sa.window().st(), sa.eid()).cmp(&(sb.window().st(), sb.eid())),
                ServiceOrder::LargestSupply => sb.ae().total_cmp(&sa.ae()).then_with(|| sa.eid().cmp(sb.eid())),
            }
        });
    }

    let mut visit: Vec<usize> = (0..requests.len()).collect();
    match order {
        RequestOrder::StartTime => {
            visit.sort_by(|&a, &b| (requests[a].window().st(), requests[a].rid()).cmp(&(requests[b].window().st(), requests[b].rid())))
        }
        RequestOrder::LargestFirst => visit.sort_by(|&a, &b| {
            requests[b]
                .re()
                .total_cmp(&requests[a].re())
                .then_with(|| requests[a].rid().cmp(requests[b].rid()))
        }),
    }

    let mut supply: Vec<Mah> = services.iter().map(|s| s.ae()).collect();
    let mut amounts = vec![0.0; graph.edges().len()];
    for j in visit {
        let mut demand = requests[j].re();
        for &k in &incident[j] {
            if demand <= tol {
                break;
            }
            let edge = &graph.edges()[k];
            let take = supply[edge.service].min(demand).min(edge.weight);
            if take <= tol {
                continue;
            }
            amounts[k] = take;
            supply[edge.service] -= take;
            demand -= take;
            if !opts.allow_split {
                break;
            }
        }
    }
    amounts
}

fn run(network: &FlowNetwork, order: RequestOrder, mode: Mode, window: CompositionWindow, opts: GreedyOptions) -> Result<CompositionResult> {
    let start = Instant::now();
    let amounts = greedy_amounts(network, order, opts);
    let elapsed: Duration = start.elapsed();
    assemble(network.graph(), &amounts, mode, window, elapsed)
}

/// First come first served: requests by start time.
pub fn compose_baseline_fcfs(network: &FlowNetwork, window: CompositionWindow, opts: GreedyOptions) -> Result<CompositionResult> {
    run(network, RequestOrder::StartTime, Mode::Baseline, window, opts)
}

/// Largest request first.
pub fn compose_priority(network: &FlowNetwork, window: CompositionWindow, opts: GreedyOptions) -> Result<CompositionResult> {
    run(network, RequestOrder::LargestFirst, Mode::Priority, window, opts)
}
