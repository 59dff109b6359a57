//! Spatio-temporal composability graphs between services and requests.
//!
//! Two variants are built over the window-filtered entities:
//!
//! * the strict graph, where a pair is connected when the service is within
//!   range of the request and one time window contains the other; every edge
//!   carries the request's full demand as its weight;
//! * the partial graph, which keeps every strict edge and adds an edge for
//!   each in-range pair whose windows merely overlap, weighted by the share
//!   of the request's demand that falls inside the overlap.
//!
//! Node lists are sorted by id so the result does not depend on input order.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CompositionWindow, EnergyRequest, EnergyService, Mah, RequestId, ServiceId, TimeInterval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    /// One window contains the other.
    Strict,
    /// Windows overlap without containment.
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphEdge {
    /// Index into [`ComposabilityGraph::services`].
    pub service: usize,
    /// Index into [`ComposabilityGraph::requests`].
    pub request: usize,
    pub eid: ServiceId,
    pub rid: RequestId,
    /// Upper bound on the energy this pair may exchange.
    pub weight: Mah,
    pub kind: EdgeKind,
}

/// Directed bipartite graph from services (U) to requests (V).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComposabilityGraph {
    services: Vec<EnergyService>,
    requests: Vec<EnergyRequest>,
    edges: Vec<GraphEdge>,
}

impl ComposabilityGraph {
    pub fn services(&self) -> &[EnergyService] {
        &self.services
    }

    pub fn requests(&self) -> &[EnergyRequest] {
        &self.requests
    }

    /// Edges sorted by `(eid, rid)`.
    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn edge(&self, eid: &ServiceId, rid: &RequestId) -> Option<&GraphEdge> {
        self.edges.iter().find(|e| &e.eid == eid && &e.rid == rid)
    }

    /// Services with at least one incident edge.
    pub fn serviceable_services(&self) -> BTreeSet<ServiceId> {
        self.edges.iter().map(|e| e.eid.clone()).collect()
    }

    /// Requests with at least one incident edge.
    pub fn serviceable_requests(&self) -> BTreeSet<RequestId> {
        self.edges.iter().map(|e| e.rid.clone()).collect()
    }

    /// Edge list as `eid,rid,weight` lines, sorted lexicographically.
    pub fn edge_list_text(&self) -> String {
        let mut lines: Vec<String> = self
            .edges
            .iter()
            .map(|e| format!("{},{},{}", e.eid, e.rid, e.weight))
            .collect();
        lines.sort();
        let mut out = String::new();
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
        out
    }
}

/// Keeps the services and requests whose windows lie inside `window`.
pub fn filter_window(
    services: &[EnergyService],
    requests: &[EnergyRequest],
    window: CompositionWindow,
) -> (Vec<EnergyService>, Vec<EnergyRequest>) {
    let s = services
        .iter()
        .filter(|s| window.admits(&s.window()))
        .cloned()
        .collect();
    let r = requests
        .iter()
        .filter(|r| window.admits(&r.window()))
        .cloned()
        .collect();
    (s, r)
}

/// Distance to the request is within the service's transfer range (inclusive).
pub fn spatially_composable(service: &EnergyService, request: &EnergyRequest) -> bool {
    service.location().distance(&request.location()) <= service.range()
}

/// One window contains the other.
pub fn temporally_composable(service: &TimeInterval, request: &TimeInterval) -> bool {
    request.contains(service) || service.contains(request)
}

pub fn overlap_duration(a: &TimeInterval, b: &TimeInterval) -> i64 {
    a.overlap(b)
}

/// Share of the request's demand that falls inside an overlap of `overlap`
/// minutes, assuming the demand is spread evenly over the request window.
pub fn partial_energy(request: &EnergyRequest, overlap: i64) -> Result<Mah> {
    let duration = request.window().duration();
    if overlap <= 0 {
        return Err(Error::NoOverlap(overlap));
    }
    if overlap > duration {
        return Err(Error::OverlapExceedsRequest { overlap, duration });
    }
    if overlap == duration {
        return Ok(request.re());
    }
    Ok(overlap as f64 * request.re() / duration as f64)
}

fn sorted_nodes(
    services: &[EnergyService],
    requests: &[EnergyRequest],
    window: CompositionWindow,
) -> (Vec<EnergyService>, Vec<EnergyRequest>) {
    let (mut s, mut r) = filter_window(services, requests, window);
    s.sort_by(|a, b| a.eid().cmp(b.eid()));
    r.sort_by(|a, b| a.rid().cmp(b.rid()));
    debug_assert!(s.windows(2).all(|w| w[0].eid() != w[1].eid()), "duplicate service ids");
    debug_assert!(r.windows(2).all(|w| w[0].rid() != w[1].rid()), "duplicate request ids");
    (s, r)
}

/// Strict composability graph.
pub fn build_bipartite(
    services: &[EnergyService],
    requests: &[EnergyRequest],
    window: CompositionWindow,
) -> ComposabilityGraph {
    let (services, requests) = sorted_nodes(services, requests, window);
    let mut edges = Vec::new();
    for (i, es) in services.iter().enumerate() {
        for (j, er) in requests.iter().enumerate() {
            if spatially_composable(es, er) && temporally_composable(&es.window(), &er.window()) {
                edges.push(GraphEdge {
                    service: i,
                    request: j,
                    eid: es.eid().clone(),
                    rid: er.rid().clone(),
                    weight: er.re(),
                    kind: EdgeKind::Strict,
                });
            }
        }
    }
    ComposabilityGraph {
        services,
        requests,
        edges,
    }
}

/// Strict graph plus partial-overlap edges.
pub fn build_partial_bipartite(
    services: &[EnergyService],
    requests: &[EnergyRequest],
    window: CompositionWindow,
) -> ComposabilityGraph {
    let mut graph = build_bipartite(services, requests, window);
    let connected: BTreeSet<(usize, usize)> = graph.edges.iter().map(|e| (e.service, e.request)).collect();
    let mut extra = Vec::new();
    for (i, es) in graph.services.iter().enumerate() {
        for (j, er) in graph.requests.iter().enumerate() {
            if connected.contains(&(i, j)) || !spatially_composable(es, er) {
                continue;
            }
            let d = overlap_duration(&es.window(), &er.window());
            if d <= 0 {
                continue;
            }
            // A strict edge would already exist if the overlap covered either
            // window, so d is below the request's duration here.
            let weight = partial_energy(er, d).expect("0 < overlap <= request duration");
            extra.push(GraphEdge {
                service: i,
                request: j,
                eid: es.eid().clone(),
                rid: er.rid().clone(),
                weight,
                kind: EdgeKind::Partial,
            });
        }
    }
    graph.edges.extend(extra);
    graph.edges.sort_by_key(|e| (e.service, e.request));
    graph
}
