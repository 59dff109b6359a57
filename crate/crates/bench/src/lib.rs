//! Shared fixtures for the criterion benches.

use flowcomp_core::workload::{generate, Population, WorkloadSpec};

/// Population of `services` providers and `requests` requests on the default
/// workload template.
pub fn population(services: usize, requests: usize, seed: u64) -> Population {
    let spec = WorkloadSpec {
        n_providers: services,
        n_requests: requests,
        seed,
        ..WorkloadSpec::default()
    };
    generate(&spec).expect("default workload template is valid")
}
