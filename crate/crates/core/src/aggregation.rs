//! Proxy-side aggregation: folds a provider's wearable spare energy into one
//! advertised service.

use crate::error::{Error, Result};
use crate::model::{EnergyService, ProviderProfile, ServiceId};

/// Aggregates `provider` into its first service (sequence number 0).
pub fn aggregate_service(provider: &ProviderProfile) -> Result<EnergyService> {
    aggregate_service_seq(provider, 0)
}

/// Aggregates `provider` into a service whose id is `<pid>-<seq>`.
///
/// The advertised amount is the exact sum of the wearables' spare energy,
/// clamped to the proxy container capacity when one is set. The availability
/// interval, location and range pass through unchanged.
pub fn aggregate_service_seq(provider: &ProviderProfile, seq: u32) -> Result<EnergyService> {
    let total: f64 = provider.wearables().iter().map(|w| w.spare_energy()).sum();
    if total <= 0.0 {
        return Err(Error::NothingToAdvertise(provider.pid().to_string()));
    }
    let ae = match provider.container_capacity() {
        Some(cap) => total.min(cap),
        None => total,
    };
    EnergyService::new(
        service_id(provider, seq),
        provider.pid().clone(),
        ae,
        provider.availability(),
        provider.location(),
        provider.range(),
    )
}

fn service_id(provider: &ProviderProfile, seq: u32) -> ServiceId {
    ServiceId::new(format!("{}-{seq}", provider.pid()))
}
