//! Domain types shared by every stage of the composition pipeline.
//!
//! All types validate their invariants on construction and are immutable
//! afterwards, so they can be shared freely across threads.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Energy amount in milliampere-hours.
pub type Mah = f64;

/// Absolute tolerance used when comparing energy amounts in checks.
pub const ENERGY_TOLERANCE: Mah = 1e-9;

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_newtype!(
    /// Identifier of an advertised energy service.
    ServiceId
);
id_newtype!(
    /// Identifier of an energy request.
    RequestId
);
id_newtype!(ProviderId);
id_newtype!(ConsumerId);
id_newtype!(WearableId);

/// Closed time interval `[st, et]` in simulation minutes, with `st < et`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct TimeInterval {
    st: i64,
    et: i64,
}

impl TimeInterval {
    pub fn new(st: i64, et: i64) -> Result<Self> {
        if st < et {
            Ok(Self { st, et })
        } else {
            Err(Error::InvalidInterval { st, et })
        }
    }

    /// Converts wall-clock seconds to whole minutes, widening outward so the
    /// minute interval covers the original one.
    pub fn from_seconds(st_secs: i64, et_secs: i64) -> Result<Self> {
        Self::new(st_secs.div_euclid(60), et_secs.div_euclid(60) + i64::from(et_secs.rem_euclid(60) != 0))
    }

    pub fn st(&self) -> i64 {
        self.st
    }

    pub fn et(&self) -> i64 {
        self.et
    }

    pub fn duration(&self) -> i64 {
        self.et - self.st
    }

    /// `other ⊆ self`, closed-interval containment.
    pub fn contains(&self, other: &TimeInterval) -> bool {
        self.st <= other.st && other.et <= self.et
    }

    /// Length of the intersection; touching endpoints give zero.
    pub fn overlap(&self, other: &TimeInterval) -> i64 {
        (self.et.min(other.et) - self.st.max(other.st)).max(0)
    }
}

impl TryFrom<(i64, i64)> for TimeInterval {
    type Error = Error;

    fn try_from((st, et): (i64, i64)) -> Result<Self> {
        Self::new(st, et)
    }
}

impl From<TimeInterval> for (i64, i64) {
    fn from(t: TimeInterval) -> Self {
        (t.st, t.et)
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.st, self.et)
    }
}

/// Planar location in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    x: f64,
    y: f64,
}

impl GeoPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::invalid("location", format!("non-finite coordinates ({x}, {y})")));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn distance(&self, other: &GeoPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

fn check_positive(field: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must be finite and > 0, got {v}")))
    }
}

fn check_non_negative(field: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must be finite and >= 0, got {v}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wearable {
    wid: WearableId,
    spare_energy: Mah,
}

impl Wearable {
    pub fn new(wid: impl Into<WearableId>, spare_energy: Mah) -> Result<Self> {
        Ok(Self {
            wid: wid.into(),
            spare_energy: check_non_negative("spare_energy", spare_energy)?,
        })
    }

    pub fn wid(&self) -> &WearableId {
        &self.wid
    }

    pub fn spare_energy(&self) -> Mah {
        self.spare_energy
    }
}

/// A provider with one or more wearables and the owner's sharing preferences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderProfile {
    pid: ProviderId,
    wearables: Vec<Wearable>,
    availability: TimeInterval,
    location: GeoPoint,
    range: f64,
    container_capacity: Option<Mah>,
}

impl ProviderProfile {
    pub fn new(
        pid: impl Into<ProviderId>,
        wearables: Vec<Wearable>,
        availability: TimeInterval,
        location: GeoPoint,
        range: f64,
    ) -> Result<Self> {
        if wearables.is_empty() {
            return Err(Error::invalid("wearables", "provider must own at least one wearable"));
        }
        Ok(Self {
            pid: pid.into(),
            wearables,
            availability,
            location,
            range: check_positive("range", range)?,
            container_capacity: None,
        })
    }

    /// Bounds the proxy's storage; aggregation clamps to it.
    pub fn with_container_capacity(mut self, capacity: Mah) -> Result<Self> {
        self.container_capacity = Some(check_positive("container_capacity", capacity)?);
        Ok(self)
    }

    pub fn pid(&self) -> &ProviderId {
        &self.pid
    }

    pub fn wearables(&self) -> &[Wearable] {
        &self.wearables
    }

    pub fn availability(&self) -> TimeInterval {
        self.availability
    }

    pub fn location(&self) -> GeoPoint {
        self.location
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn container_capacity(&self) -> Option<Mah> {
        self.container_capacity
    }
}

/// A provider's aggregated, divisible energy supply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyService {
    eid: ServiceId,
    pid: ProviderId,
    ae: Mah,
    window: TimeInterval,
    location: GeoPoint,
    range: f64,
}

impl EnergyService {
    pub fn new(
        eid: impl Into<ServiceId>,
        pid: impl Into<ProviderId>,
        ae: Mah,
        window: TimeInterval,
        location: GeoPoint,
        range: f64,
    ) -> Result<Self> {
        Ok(Self {
            eid: eid.into(),
            pid: pid.into(),
            ae: check_positive("ae", ae)?,
            window,
            location,
            range: check_positive("range", range)?,
        })
    }

    pub fn eid(&self) -> &ServiceId {
        &self.eid
    }

    pub fn pid(&self) -> &ProviderId {
        &self.pid
    }

    /// Advertised energy.
    pub fn ae(&self) -> Mah {
        self.ae
    }

    pub fn window(&self) -> TimeInterval {
        self.window
    }

    pub fn location(&self) -> GeoPoint {
        self.location
    }

    pub fn range(&self) -> f64 {
        self.range
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRequest {
    rid: RequestId,
    cid: ConsumerId,
    re: Mah,
    window: TimeInterval,
    location: GeoPoint,
}

impl EnergyRequest {
    pub fn new(
        rid: impl Into<RequestId>,
        cid: impl Into<ConsumerId>,
        re: Mah,
        window: TimeInterval,
        location: GeoPoint,
    ) -> Result<Self> {
        Ok(Self {
            rid: rid.into(),
            cid: cid.into(),
            re: check_positive("re", re)?,
            window,
            location,
        })
    }

    pub fn rid(&self) -> &RequestId {
        &self.rid
    }

    pub fn cid(&self) -> &ConsumerId {
        &self.cid
    }

    /// Requested energy.
    pub fn re(&self) -> Mah {
        self.re
    }

    pub fn window(&self) -> TimeInterval {
        self.window
    }

    pub fn location(&self) -> GeoPoint {
        self.location
    }
}

/// The batching window `T` a composition runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CompositionWindow(TimeInterval);

impl CompositionWindow {
    pub fn new(window: TimeInterval) -> Self {
        Self(window)
    }

    pub fn from_bounds(st: i64, et: i64) -> Result<Self> {
        TimeInterval::new(st, et).map(Self)
    }

    pub fn interval(&self) -> TimeInterval {
        self.0
    }

    pub fn admits(&self, t: &TimeInterval) -> bool {
        self.0.contains(t)
    }
}

/// Energy flowing over one service → request edge. Zero amounts are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub eid: ServiceId,
    pub rid: RequestId,
    pub amount: Mah,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// First come first served on request start time.
    Baseline,
    /// Largest request first.
    Priority,
    /// Max-flow over the strict containment graph.
    Flow,
    /// Max-flow over the graph extended with partial-overlap edges.
    #[serde(rename = "partial")]
    PartialFlow,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Baseline, Mode::Priority, Mode::Flow, Mode::PartialFlow];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Priority => "priority",
            Mode::Flow => "flow",
            Mode::PartialFlow => "partial",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" | "fcfs" => Ok(Mode::Baseline),
            "priority" => Ok(Mode::Priority),
            "flow" => Ok(Mode::Flow),
            "partial" | "partialflow" | "partial-flow" => Ok(Mode::PartialFlow),
            other => Err(Error::invalid("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Output of one composition run, with everything the metrics need.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionResult {
    allocations: Vec<Allocation>,
    services: Vec<EnergyService>,
    requests: Vec<EnergyRequest>,
    serviceable_service_ids: BTreeSet<ServiceId>,
    serviceable_request_ids: BTreeSet<RequestId>,
    mode: Mode,
    window: CompositionWindow,
    elapsed: Duration,
}

impl CompositionResult {
    /// Assembles a result. Allocations are sorted by `(eid, rid)` and must
    /// reference the considered services and requests.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mut allocations: Vec<Allocation>,
        services: Vec<EnergyService>,
        requests: Vec<EnergyRequest>,
        serviceable_service_ids: BTreeSet<ServiceId>,
        serviceable_request_ids: BTreeSet<RequestId>,
        mode: Mode,
        window: CompositionWindow,
        elapsed: Duration,
    ) -> Result<Self> {
        for a in &allocations {
            if !(a.amount > 0.0 && a.amount.is_finite()) {
                return Err(Error::InvariantViolation(format!(
                    "allocation {} -> {} has non-positive amount {}",
                    a.eid, a.rid, a.amount
                )));
            }
            if !services.iter().any(|s| s.eid() == &a.eid) {
                return Err(Error::UnknownService(a.eid.to_string()));
            }
            if !requests.iter().any(|r| r.rid() == &a.rid) {
                return Err(Error::UnknownRequest(a.rid.to_string()));
            }
        }
        allocations.sort_by(|a, b| (&a.eid, &a.rid).cmp(&(&b.eid, &b.rid)));
        Ok(Self {
            allocations,
            services,
            requests,
            serviceable_service_ids,
            serviceable_request_ids,
            mode,
            window,
            elapsed,
        })
    }

    pub fn allocations(&self) -> &[Allocation] {
        &self.allocations
    }

    pub fn services(&self) -> &[EnergyService] {
        &self.services
    }

    pub fn requests(&self) -> &[EnergyRequest] {
        &self.requests
    }

    pub fn serviceable_service_ids(&self) -> &BTreeSet<ServiceId> {
        &self.serviceable_service_ids
    }

    pub fn serviceable_request_ids(&self) -> &BTreeSet<RequestId> {
        &self.serviceable_request_ids
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn window(&self) -> CompositionWindow {
        self.window
    }

    pub fn elapsed(&self) -> Duration {
        self.elapsed
    }

    pub fn service(&self, eid: &ServiceId) -> Option<&EnergyService> {
        self.services.iter().find(|s| s.eid() == eid)
    }

    pub fn request(&self, rid: &RequestId) -> Option<&EnergyRequest> {
        self.requests.iter().find(|r| r.rid() == rid)
    }

    /// Sum of all allocated amounts.
    pub fn total_allocated(&self) -> Mah {
        self.allocations.iter().map(|a| a.amount).sum()
    }

    /// Energy drawn from service `eid` across all its allocations.
    pub fn total_allocated_for_service(&self, eid: &ServiceId) -> Result<Mah> {
        if self.service(eid).is_none() {
            return Err(Error::UnknownService(eid.to_string()));
        }
        Ok(self
            .allocations
            .iter()
            .filter(|a| &a.eid == eid)
            .map(|a| a.amount)
            .sum())
    }

    /// Energy delivered to request `rid` across all its allocations.
    pub fn total_allocated_for_request(&self, rid: &RequestId) -> Result<Mah> {
        if self.request(rid).is_none() {
            return Err(Error::UnknownRequest(rid.to_string()));
        }
        Ok(self
            .allocations
            .iter()
            .filter(|a| &a.rid == rid)
            .map(|a| a.amount)
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn svc(eid: &str, ae: f64) -> EnergyService {
        EnergyService::new(
            eid,
            "p",
            ae,
            TimeInterval::new(0, 60).unwrap(),
            GeoPoint::new(0.0, 0.0).unwrap(),
            5.0,
        )
        .unwrap()
    }

    fn req(rid: &str, re: f64) -> EnergyRequest {
        EnergyRequest::new(
            rid,
            "c",
            re,
            TimeInterval::new(0, 60).unwrap(),
            GeoPoint::new(0.0, 0.0).unwrap(),
        )
        .unwrap()
    }

    fn result(allocs: &[(&str, &str, f64)], services: Vec<EnergyService>, requests: Vec<EnergyRequest>) -> CompositionResult {
        CompositionResult::new(
            allocs
                .iter()
                .map(|&(e, r, amount)| Allocation {
                    eid: e.into(),
                    rid: r.into(),
                    amount,
                })
                .collect(),
            services,
            requests,
            BTreeSet::new(),
            BTreeSet::new(),
            Mode::Flow,
            CompositionWindow::from_bounds(0, 60).unwrap(),
            Duration::ZERO,
        )
        .unwrap()
    }

    #[test]
    fn interval_rejects_empty_and_reversed() {
        assert!(TimeInterval::new(5, 5).is_err());
        assert!(TimeInterval::new(6, 5).is_err());
        assert_eq!(TimeInterval::new(5, 6).unwrap().duration(), 1);
    }

    #[test]
    fn seconds_are_widened_to_minutes() {
        let t = TimeInterval::from_seconds(90, 150).unwrap();
        assert_eq!((t.st(), t.et()), (1, 3));
        let t = TimeInterval::from_seconds(120, 240).unwrap();
        assert_eq!((t.st(), t.et()), (2, 4));
    }

    #[test]
    fn geo_point_rejects_non_finite() {
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
        assert!(GeoPoint::new(0.0, f64::INFINITY).is_err());
        assert_eq!(GeoPoint::new(0.0, 0.0).unwrap().distance(&GeoPoint::new(3.0, 4.0).unwrap()), 5.0);
    }

    #[test]
    fn entity_invariants() {
        assert!(Wearable::new("w", -1.0).is_err());
        assert!(Wearable::new("w", 0.0).is_ok());
        let t = TimeInterval::new(0, 1).unwrap();
        let l = GeoPoint::new(0.0, 0.0).unwrap();
        assert!(EnergyService::new("e", "p", 0.0, t, l, 5.0).is_err());
        assert!(EnergyService::new("e", "p", 1.0, t, l, 0.0).is_err());
        assert!(EnergyRequest::new("r", "c", 0.0, t, l).is_err());
        assert!(ProviderProfile::new("p", vec![], t, l, 5.0).is_err());
    }

    #[test]
    fn service_total_sums_allocations() {
        let r = result(
            &[("s1", "r1", 30.0), ("s1", "r2", 12.86)],
            vec![svc("s1", 100.0), svc("s2", 100.0)],
            vec![req("r1", 50.0), req("r2", 50.0)],
        );
        let expected: f64 = [30.0, 12.86].iter().sum();
        assert!((r.total_allocated_for_service(&"s1".into()).unwrap() - expected).abs() < ENERGY_TOLERANCE);
        assert_eq!(r.total_allocated_for_service(&"s2".into()).unwrap(), 0.0);
        assert!(matches!(
            r.total_allocated_for_service(&"nope".into()),
            Err(Error::UnknownService(_))
        ));
    }

    #[test]
    fn request_total_sums_allocations() {
        let r = result(&[("s1", "r1", 300.0)], vec![svc("s1", 700.0)], vec![req("r1", 300.0)]);
        assert_eq!(r.total_allocated_for_request(&"r1".into()).unwrap(), 300.0);

        let r = result(
            &[("s1", "r1", 100.0), ("s2", "r1", 150.0)],
            vec![svc("s1", 100.0), svc("s2", 150.0)],
            vec![req("r1", 300.0)],
        );
        assert_eq!(r.total_allocated_for_request(&"r1".into()).unwrap(), 250.0);
        assert!(matches!(
            r.total_allocated_for_request(&"r9".into()),
            Err(Error::UnknownRequest(_))
        ));
    }

    #[test]
    fn result_rejects_dangling_allocation() {
        let err = CompositionResult::new(
            vec![Allocation {
                eid: "ghost".into(),
                rid: "r1".into(),
                amount: 1.0,
            }],
            vec![svc("s1", 1.0)],
            vec![req("r1", 1.0)],
            BTreeSet::new(),
            BTreeSet::new(),
            Mode::Flow,
            CompositionWindow::from_bounds(0, 60).unwrap(),
            Duration::ZERO,
        );
        assert!(err.is_err());
    }

    #[test]
    fn mode_parses_cli_names() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert!("greedy".parse::<Mode>().is_err());
    }
}
