//! Composition of crowdsourced wearable energy services.
//!
//! Providers aggregate the spare energy of their wearables into a single
//! advertised [`EnergyService`]. Services and [`EnergyRequest`]s that fall in
//! a batching window are connected in a spatio-temporal composability graph,
//! which is turned into a source/sink capacity network and solved with
//! push-relabel maximum flow. Greedy first-come-first-served and
//! largest-request-first allocators run on the same network for comparison,
//! and [`metrics`] scores any result.

pub mod aggregation;
pub mod error;
pub mod experiment;
pub mod flow;
pub mod graph;
pub mod metrics;
pub mod model;
pub mod workload;

pub use aggregation::{aggregate_service, aggregate_service_seq};
pub use error::{Error, Result};
pub use flow::{compose, compose_with, ComposeOptions};
pub use graph::{build_bipartite, build_partial_bipartite, ComposabilityGraph, GraphEdge};
pub use metrics::{MetricsConfig, MetricsReport, Scope};
pub use model::{
    Allocation, CompositionResult, CompositionWindow, ConsumerId, EnergyRequest, EnergyService, GeoPoint, Mah, Mode,
    ProviderId, ProviderProfile, RequestId, ServiceId, TimeInterval, Wearable, WearableId,
};
pub use workload::WorkloadSpec;
