//! Scoring of a composition: energy utilization, fulfillment rate, per-party
//! satisfaction, and satisfaction entropy.
//!
//! Every metric is restricted to serviceable entities. By default those are
//! the entities with at least one edge in the graph the composition ran on;
//! the `*_in` variants take an explicit [`Scope`] instead, so several modes
//! can be scored over one shared population. The result's entity lists
//! already contain only in-window entities.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CompositionResult, Mah, RequestId, ServiceId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    /// Satisfaction threshold in `(0, 1]`.
    sf: f64,
}

impl MetricsConfig {
    pub const DEFAULT_SF: f64 = 0.8;

    pub fn new(sf: f64) -> Result<Self> {
        if sf > 0.0 && sf <= 1.0 {
            Ok(Self { sf })
        } else {
            Err(Error::invalid("sf", format!("satisfaction threshold must lie in (0, 1], got {sf}")))
        }
    }

    pub fn sf(&self) -> f64 {
        self.sf
    }
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { sf: Self::DEFAULT_SF }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub eu: f64,
    pub fr: f64,
    pub cs_scores: BTreeMap<RequestId, f64>,
    pub ps_scores: BTreeMap<ServiceId, f64>,
    pub cs_entropy: f64,
    pub ps_entropy: f64,
    /// Mean and population std of the scores; 0 when there are none.
    pub cs_mean: f64,
    pub cs_std: f64,
    pub ps_mean: f64,
    pub ps_std: f64,
}

/// The services and requests a metric is computed over.
#[derive(Debug, Clone, Copy)]
pub struct Scope<'a> {
    pub services: &'a BTreeSet<ServiceId>,
    pub requests: &'a BTreeSet<RequestId>,
}

impl<'a> Scope<'a> {
    /// The result's own serviceable sets.
    pub fn of(result: &'a CompositionResult) -> Self {
        Self {
            services: result.serviceable_service_ids(),
            requests: result.serviceable_request_ids(),
        }
    }
}

fn per_service_totals(result: &CompositionResult) -> BTreeMap<&ServiceId, Mah> {
    let mut totals = BTreeMap::new();
    for a in result.allocations() {
        *totals.entry(&a.eid).or_insert(0.0) += a.amount;
    }
    totals
}

fn per_request_totals(result: &CompositionResult) -> BTreeMap<&RequestId, Mah> {
    let mut totals = BTreeMap::new();
    for a in result.allocations() {
        *totals.entry(&a.rid).or_insert(0.0) += a.amount;
    }
    totals
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        (num / den).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Allocated over advertised energy, across serviceable services.
pub fn energy_utilization(result: &CompositionResult) -> f64 {
    energy_utilization_in(result, Scope::of(result))
}

pub fn energy_utilization_in(result: &CompositionResult, scope: Scope<'_>) -> f64 {
    let totals = per_service_totals(result);
    let (num, den) = result
        .services()
        .iter()
        .filter(|s| scope.services.contains(s.eid()))
        .fold((0.0, 0.0), |(n, d), s| (n + totals.get(s.eid()).copied().unwrap_or(0.0), d + s.ae()));
    ratio(num, den)
}

/// Allocated over requested energy, across serviceable requests.
pub fn fulfillment_rate(result: &CompositionResult) -> f64 {
    fulfillment_rate_in(result, Scope::of(result))
}

pub fn fulfillment_rate_in(result: &CompositionResult, scope: Scope<'_>) -> f64 {
    let totals = per_request_totals(result);
    let (num, den) = result
        .requests()
        .iter()
        .filter(|r| scope.requests.contains(r.rid()))
        .fold((0.0, 0.0), |(n, d), r| (n + totals.get(r.rid()).copied().unwrap_or(0.0), d + r.re()));
    ratio(num, den)
}

/// `1` once `received` reaches `wanted`, otherwise `received / (wanted·sf)`
/// capped at 1.
pub fn satisfaction_score(received: Mah, wanted: Mah, sf: f64) -> f64 {
    if received >= wanted {
        1.0
    } else {
        (received / (wanted * sf)).clamp(0.0, 1.0)
    }
}

pub fn consumer_satisfaction(result: &CompositionResult, cfg: &MetricsConfig) -> BTreeMap<RequestId, f64> {
    consumer_satisfaction_in(result, cfg, Scope::of(result))
}

pub fn consumer_satisfaction_in(
    result: &CompositionResult,
    cfg: &MetricsConfig,
    scope: Scope<'_>,
) -> BTreeMap<RequestId, f64> {
    let totals = per_request_totals(result);
    result
        .requests()
        .iter()
        .filter(|r| scope.requests.contains(r.rid()))
        .map(|r| {
            let got = totals.get(r.rid()).copied().unwrap_or(0.0);
            (r.rid().clone(), satisfaction_score(got, r.re(), cfg.sf))
        })
        .collect()
}

pub fn provider_satisfaction(result: &CompositionResult, cfg: &MetricsConfig) -> BTreeMap<ServiceId, f64> {
    provider_satisfaction_in(result, cfg, Scope::of(result))
}

pub fn provider_satisfaction_in(
    result: &CompositionResult,
    cfg: &MetricsConfig,
    scope: Scope<'_>,
) -> BTreeMap<ServiceId, f64> {
    let totals = per_service_totals(result);
    result
        .services()
        .iter()
        .filter(|s| scope.services.contains(s.eid()))
        .map(|s| {
            let used = totals.get(s.eid()).copied().unwrap_or(0.0);
            (s.eid().clone(), satisfaction_score(used, s.ae(), cfg.sf))
        })
        .collect()
}

/// Shannon entropy in bits, `-Σ s·log2(s)`, with `0·log2(0) = 0`.
pub fn satisfaction_entropy<I>(scores: I) -> Result<f64>
where
    I: IntoIterator<Item = f64>,
{
    let mut h = 0.0;
    for s in scores {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::ScoreOutOfRange(s));
        }
        if s > 0.0 {
            h -= s * s.log2();
        }
    }
    Ok(h.max(0.0))
}

/// Mean and population standard deviation (Welford).
pub fn summary_stats<I>(scores: I) -> Result<(f64, f64)>
where
    I: IntoIterator<Item = f64>,
{
    let mut n = 0u64;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for x in scores {
        n += 1;
        let delta = x - mean;
        mean += delta / n as f64;
        m2 += delta * (x - mean);
    }
    if n == 0 {
        return Err(Error::EmptyScores);
    }
    Ok((mean, (m2 / n as f64).max(0.0).sqrt()))
}

pub fn evaluate(result: &CompositionResult, cfg: &MetricsConfig) -> Result<MetricsReport> {
    evaluate_in(result, cfg, Scope::of(result))
}

pub fn evaluate_in(result: &CompositionResult, cfg: &MetricsConfig, scope: Scope<'_>) -> Result<MetricsReport> {
    let cs_scores = consumer_satisfaction_in(result, cfg, scope);
    let ps_scores = provider_satisfaction_in(result, cfg, scope);
    let stats = |v: Vec<f64>| -> Result<(f64, f64)> {
        if v.is_empty() {
            Ok((0.0, 0.0))
        } else {
            summary_stats(v)
        }
    };
    let (cs_mean, cs_std) = stats(cs_scores.values().copied().collect())?;
    let (ps_mean, ps_std) = stats(ps_scores.values().copied().collect())?;
    Ok(MetricsReport {
        eu: energy_utilization_in(result, scope),
        fr: fulfillment_rate_in(result, scope),
        cs_entropy: satisfaction_entropy(cs_scores.values().copied())?,
        ps_entropy: satisfaction_entropy(ps_scores.values().copied())?,
        cs_scores,
        ps_scores,
        cs_mean,
        cs_std,
        ps_mean,
        ps_std,
    })
}
