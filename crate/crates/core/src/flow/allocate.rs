use std::collections::BTreeMap;
use std::time::Duration;

use super::network::{FlowNetwork, SINK, SOURCE};
use super::push_relabel::{tolerance, FlowAssignment};
use crate::error::{Error, Result};
use crate::graph::ComposabilityGraph;
use crate::model::{Allocation, CompositionResult, CompositionWindow, Mah, Mode, RequestId, ServiceId};

/// Checks that `fa` is a feasible flow on `network` within tolerance.
pub fn check_flow(network: &FlowNetwork, fa: &FlowAssignment) -> Result<()> {
    let arcs = network.arcs();
    if fa.flow.len() != arcs.len() {
        return Err(Error::InvariantViolation(format!(
            "flow has {} entries for {} arcs",
            fa.flow.len(),
            arcs.len()
        )));
    }
    let tol = tolerance(network.max_capacity());
    let mut balance = vec![0.0; network.node_count()];
    for (a, (arc, &f)) in arcs.iter().zip(&fa.flow).enumerate() {
        if !f.is_finite() || f < -tol || f > arc.capacity + tol {
            return Err(Error::InvariantViolation(format!(
                "arc {a} ({} -> {}) carries {f} outside [0, {}]",
                network.label(arc.from),
                network.label(arc.to),
                arc.capacity
            )));
        }
        balance[arc.from] -= f;
        balance[arc.to] += f;
    }
    let node_tol = tol * network.node_count() as f64;
    for (v, b) in balance.iter().enumerate() {
        if v != SOURCE && v != SINK && b.abs() > node_tol {
            return Err(Error::InvariantViolation(format!(
                "flow not conserved at {}: imbalance {b}",
                network.label(v)
            )));
        }
    }
    if (balance[SINK] - fa.value).abs() > node_tol || (balance[SOURCE] + fa.value).abs() > node_tol {
        return Err(Error::InvariantViolation(format!(
            "flow value {} disagrees with source out-flow {} / sink in-flow {}",
            fa.value, -balance[SOURCE], balance[SINK]
        )));
    }
    Ok(())
}

/// Turns a feasible flow into per-edge allocations.
pub fn extract_allocation(
    fa: &FlowAssignment,
    network: &FlowNetwork,
    mode: Mode,
    window: CompositionWindow,
    elapsed: Duration,
) -> Result<CompositionResult> {
    check_flow(network, fa)?;
    let tol = tolerance(network.max_capacity());
    let amounts = network
        .graph()
        .edges()
        .iter()
        .enumerate()
        .map(|(k, _)| fa.on_arc(network.edge_arc(k)))
        .map(|f| if f > tol { f } else { 0.0 })
        .collect::<Vec<_>>();
    assemble(network.graph(), &amounts, mode, window, elapsed)
}

/// Builds a result from per-edge amounts (index-aligned with the graph's edges).
pub(crate) fn assemble(
    graph: &ComposabilityGraph,
    edge_amounts: &[Mah],
    mode: Mode,
    window: CompositionWindow,
    elapsed: Duration,
) -> Result<CompositionResult> {
    let allocations = graph
        .edges()
        .iter()
        .zip(edge_amounts)
        .filter(|(_, &amount)| amount > 0.0)
        .map(|(e, &amount)| Allocation {
            eid: e.eid.clone(),
            rid: e.rid.clone(),
            amount,
        })
        .collect();
    CompositionResult::new(
        allocations,
        graph.services().to_vec(),
        graph.requests().to_vec(),
        graph.serviceable_services(),
        graph.serviceable_requests(),
        mode,
        window,
        elapsed,
    )
}

/// Verifies every capacity constraint of `result` against the graph it was
/// built on: per-service supply, per-request demand, per-edge weight, and
/// that allocated energy is conserved across the three summations.
pub fn verify_result(result: &CompositionResult, graph: &ComposabilityGraph) -> Result<()> {
    let max_cap = graph
        .services()
        .iter()
        .map(|s| s.ae())
        .chain(graph.requests().iter().map(|r| r.re()))
        .fold(0.0, f64::max);
    let tol = tolerance(max_cap) * (1 + graph.edges().len()) as f64;

    let mut per_service: BTreeMap<&ServiceId, Mah> = BTreeMap::new();
    let mut per_request: BTreeMap<&RequestId, Mah> = BTreeMap::new();
    let mut seen = std::collections::BTreeSet::new();
    for a in result.allocations() {
        if !seen.insert((&a.eid, &a.rid)) {
            return Err(Error::InvariantViolation(format!("duplicate allocation {} -> {}", a.eid, a.rid)));
        }
        let edge = graph
            .edge(&a.eid, &a.rid)
            .ok_or_else(|| Error::InvariantViolation(format!("allocation {} -> {} has no graph edge", a.eid, a.rid)))?;
        if a.amount <= 0.0 || a.amount > edge.weight + tol {
            return Err(Error::InvariantViolation(format!(
                "allocation {} -> {} of {} exceeds edge weight {}",
                a.eid, a.rid, a.amount, edge.weight
            )));
        }
        *per_service.entry(&a.eid).or_default() += a.amount;
        *per_request.entry(&a.rid).or_default() += a.amount;
    }
    for s in result.services() {
        let used = result.total_allocated_for_service(s.eid())?;
        if used > s.ae() + tol {
            return Err(Error::InvariantViolation(format!(
                "service {} allocates {used} beyond its supply {}",
                s.eid(),
                s.ae()
            )));
        }
    }
    for r in result.requests() {
        let got = result.total_allocated_for_request(r.rid())?;
        if got > r.re() + tol {
            return Err(Error::InvariantViolation(format!(
                "request {} receives {got} beyond its demand {}",
                r.rid(),
                r.re()
            )));
        }
    }
    let total = result.total_allocated();
    let by_service: Mah = per_service.values().sum();
    let by_request: Mah = per_request.values().sum();
    if (total - by_service).abs() > tol || (total - by_request).abs() > tol {
        return Err(Error::InvariantViolation(format!(
            "allocated energy not conserved: {total} vs {by_service} (services) vs {by_request} (requests)"
        )));
    }
    Ok(())
}
