//! Synthetic service/request populations and their CSV form.
//!
//! Energies are drawn on a grid of 1/64 mAh so that wearable shares sum to
//! the drawn service amount exactly in floating point.

use std::collections::HashSet;
use std::fs::File;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregation::aggregate_service;
use crate::error::{Error, Result};
use crate::model::{CompositionWindow, EnergyRequest, EnergyService, GeoPoint, Mah, ProviderProfile, TimeInterval, Wearable};

const ENERGY_QUANTUM_PER_MAH: f64 = 64.0;

pub const SERVICES_HEADER: [&str; 8] = ["eid", "pid", "ae_mAh", "st_min", "et_min", "x_m", "y_m", "range_m"];
pub const REQUESTS_HEADER: [&str; 7] = ["rid", "cid", "re_mAh", "st_min", "et_min", "x_m", "y_m"];

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Area {
    pub fn square(side: f64) -> Self {
        Self {
            x_min: 0.0,
            x_max: side,
            y_min: 0.0,
            y_max: side,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadSpec {
    pub n_providers: usize,
    pub n_requests: usize,
    pub window: CompositionWindow,
    /// Inclusive bounds in minutes.
    pub duration_range: (i64, i64),
    /// Inclusive bounds in mAh, for both service and request energy.
    pub energy_range: (Mah, Mah),
    pub wearables_per_provider: (u32, u32),
    pub area: Area,
    /// Transfer range shared by every provider, meters.
    pub range_value: f64,
    pub seed: u64,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        Self {
            n_providers: 20,
            n_requests: 50,
            window: CompositionWindow::from_bounds(0, 120).expect("static window"),
            duration_range: (5, 60),
            energy_range: (5.0, 100.0),
            wearables_per_provider: (1, 4),
            area: Area::square(10.0),
            range_value: 5.0,
            seed: 0,
        }
    }
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<()> {
        let (dmin, dmax) = self.duration_range;
        if dmin < 1 || dmin > dmax {
            return Err(Error::InfeasibleSpec(format!("duration range [{dmin}, {dmax}] must satisfy 1 <= min <= max")));
        }
        let len = self.window.interval().duration();
        if dmax > len {
            return Err(Error::InfeasibleSpec(format!("max duration {dmax} exceeds window length {len}")));
        }
        let (emin, emax) = self.energy_range;
        if !(emin.is_finite() && emax.is_finite() && emin > 0.0 && emin <= emax) {
            return Err(Error::InfeasibleSpec(format!("energy range [{emin}, {emax}] must satisfy 0 < min <= max")));
        }
        if (emin * ENERGY_QUANTUM_PER_MAH).ceil() > (emax * ENERGY_QUANTUM_PER_MAH).floor() {
            return Err(Error::InfeasibleSpec(format!("energy range [{emin}, {emax}] is narrower than 1/64 mAh")));
        }
        let (wmin, wmax) = self.wearables_per_provider;
        if wmin < 1 || wmin > wmax {
            return Err(Error::InfeasibleSpec(format!("wearables per provider [{wmin}, {wmax}] must satisfy 1 <= min <= max")));
        }
        let a = &self.area;
        if ![a.x_min, a.x_max, a.y_min, a.y_max].iter().all(|v| v.is_finite()) || a.x_min > a.x_max || a.y_min > a.y_max {
            return Err(Error::InfeasibleSpec(format!("invalid area {a:?}")));
        }
        if !(self.range_value.is_finite() && self.range_value > 0.0) {
            return Err(Error::InfeasibleSpec(format!("range {} must be > 0", self.range_value)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub providers: Vec<ProviderProfile>,
    pub services: Vec<EnergyService>,
    pub requests: Vec<EnergyRequest>,
}

fn draw_interval(rng: &mut impl Rng, spec: &WorkloadSpec) -> TimeInterval {
    let w = spec.window.interval();
    let dur = rng.random_range(spec.duration_range.0..=spec.duration_range.1);
    let st = rng.random_range(w.st()..=w.et() - dur);
    TimeInterval::new(st, st + dur).expect("positive duration")
}

fn draw_point(rng: &mut impl Rng, area: &Area) -> GeoPoint {
    let x = if area.x_min < area.x_max { rng.random_range(area.x_min..=area.x_max) } else { area.x_min };
    let y = if area.y_min < area.y_max { rng.random_range(area.y_min..=area.y_max) } else { area.y_min };
    GeoPoint::new(x, y).expect("finite area")
}

/// Energy amount in quanta, uniform over the representable grid in the range.
fn draw_energy_units(rng: &mut impl Rng, range: (Mah, Mah)) -> u64 {
    let lo = (range.0 * ENERGY_QUANTUM_PER_MAH).ceil() as u64;
    let hi = (range.1 * ENERGY_QUANTUM_PER_MAH).floor() as u64;
    rng.random_range(lo.max(1)..=hi)
}

fn units_to_mah(units: u64) -> Mah {
    units as f64 / ENERGY_QUANTUM_PER_MAH
}

/// Splits `total` quanta into `k` non-negative parts via sorted uniform cuts.
fn split_units(rng: &mut impl Rng, total: u64, k: u32) -> Vec<u64> {
    let mut cuts: Vec<u64> = (1..k).map(|_| rng.random_range(0..=total)).collect();
    cuts.push(0);
    cuts.push(total);
    cuts.sort_unstable();
    cuts.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Deterministic population for `spec`. Providers and requests come from
/// independent streams of the same seed.
pub fn generate(spec: &WorkloadSpec) -> Result<Population> {
    spec.validate()?;
    let mut prov_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    prov_rng.set_stream(1);
    let mut req_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    req_rng.set_stream(2);

    let mut providers = Vec::with_capacity(spec.n_providers);
    let mut services = Vec::with_capacity(spec.n_providers);
    for i in 0..spec.n_providers {
        let pid = format!("P{i:04}");
        let availability = draw_interval(&mut prov_rng, spec);
        let location = draw_point(&mut prov_rng, &spec.area);
        let total = draw_energy_units(&mut prov_rng, spec.energy_range);
        let k = prov_rng.random_range(spec.wearables_per_provider.0..=spec.wearables_per_provider.1);
        let wearables = split_units(&mut prov_rng, total, k)
            .into_iter()
            .enumerate()
            .map(|(w, units)| Wearable::new(format!("{pid}-w{w}"), units_to_mah(units)))
            .collect::<Result<Vec<_>>>()?;
        let provider = ProviderProfile::new(pid, wearables, availability, location, spec.range_value)?;
        services.push(aggregate_service(&provider)?);
        providers.push(provider);
    }

    let mut requests = Vec::with_capacity(spec.n_requests);
    for j in 0..spec.n_requests {
        let window = draw_interval(&mut req_rng, spec);
        let location = draw_point(&mut req_rng, &spec.area);
        let re = units_to_mah(draw_energy_units(&mut req_rng, spec.energy_range));
        requests.push(EnergyRequest::new(format!("R{j:04}"), format!("C{j:04}"), re, window, location)?);
    }

    Ok(Population {
        providers,
        services,
        requests,
    })
}

struct Columns<'a> {
    path: &'a Path,
    headers: csv::StringRecord,
}

impl Columns<'_> {
    fn index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h.trim() == name)
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.index(name).ok_or_else(|| Error::Schema {
            path: self.path.to_path_buf(),
            reason: format!("missing column `{name}`"),
        })
    }

    /// Column indices for the time window: minutes, or seconds converted to minutes.
    fn time_columns(&self) -> Result<(usize, usize, bool)> {
        match (self.index("st_min"), self.index("et_min")) {
            (Some(st), Some(et)) => Ok((st, et, false)),
            _ => match (self.index("st_s"), self.index("et_s")) {
                (Some(st), Some(et)) => Ok((st, et, true)),
                _ => Err(Error::Schema {
                    path: self.path.to_path_buf(),
                    reason: "missing column `st_min`/`et_min`".into(),
                }),
            },
        }
    }
}

struct Row<'a> {
    path: &'a Path,
    headers: &'a csv::StringRecord,
    record: &'a csv::StringRecord,
    line: u64,
}

impl Row<'_> {
    fn err(&self, idx: usize, reason: impl Into<String>) -> Error {
        Error::Csv {
            path: self.path.to_path_buf(),
            line: self.line,
            field: self.headers.get(idx).unwrap_or("?").trim().to_owned(),
            reason: reason.into(),
        }
    }

    fn str(&self, idx: usize) -> Result<&str> {
        match self.record.get(idx).map(str::trim) {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(self.err(idx, "empty value")),
        }
    }

    fn parse<T: std::str::FromStr>(&self, idx: usize) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.str(idx)?;
        s.parse::<T>().map_err(|e| self.err(idx, format!("cannot parse `{s}`: {e}")))
    }

    fn interval(&self, st: usize, et: usize, seconds: bool) -> Result<TimeInterval> {
        let (a, b): (i64, i64) = (self.parse(st)?, self.parse(et)?);
        let t = if seconds { TimeInterval::from_seconds(a, b) } else { TimeInterval::new(a, b) };
        t.map_err(|e| self.err(et, e.to_string()))
    }

    fn point(&self, x: usize, y: usize) -> Result<GeoPoint> {
        GeoPoint::new(self.parse(x)?, self.parse(y)?).map_err(|e| self.err(x, e.to_string()))
    }
}

fn open(path: &Path) -> Result<(csv::Reader<File>, Columns<'_>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = rdr.headers()?.clone();
    Ok((rdr, Columns { path, headers }))
}

fn for_each_row<F>(rdr: &mut csv::Reader<File>, cols: &Columns<'_>, mut visit: F) -> Result<()>
where
    F: FnMut(&Row<'_>) -> Result<()>,
{
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| match e.position() {
            Some(pos) => Error::Csv {
                path: cols.path.to_path_buf(),
                line: pos.line(),
                field: String::new(),
                reason: e.to_string(),
            },
            None => Error::from(e),
        })?;
        if !more {
            return Ok(());
        }
        visit(&Row {
            path: cols.path,
            headers: &cols.headers,
            record: &record,
            line: record.position().map(|p| p.line()).unwrap_or(0),
        })?;
    }
}

fn duplicate(path: &Path, id: &str, line: u64) -> Error {
    Error::DuplicateId {
        path: path.to_path_buf(),
        id: id.to_owned(),
        line,
    }
}

/// Reads a services file. Times may be given in minutes (`st_min`, `et_min`)
/// or in seconds (`st_s`, `et_s`), which are widened to whole minutes.
pub fn load_services(path: impl AsRef<Path>) -> Result<Vec<EnergyService>> {
    let path = path.as_ref();
    let (mut rdr, cols) = open(path)?;
    let eid = cols.require("eid")?;
    let pid = cols.require("pid")?;
    let ae = cols.require("ae_mAh")?;
    let (st, et, secs) = cols.time_columns()?;
    let x = cols.require("x_m")?;
    let y = cols.require("y_m")?;
    let range = cols.require("range_m")?;

    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for_each_row(&mut rdr, &cols, |row| {
        let id = row.str(eid)?.to_owned();
        if !seen.insert(id.clone()) {
            return Err(duplicate(path, &id, row.line));
        }
        let ae_v: f64 = row.parse(ae)?;
        let range_v: f64 = row.parse(range)?;
        if !(ae_v.is_finite() && ae_v > 0.0) {
            return Err(row.err(ae, format!("must be > 0, got {ae_v}")));
        }
        if !(range_v.is_finite() && range_v > 0.0) {
            return Err(row.err(range, format!("must be > 0, got {range_v}")));
        }
        out.push(EnergyService::new(
            id,
            row.str(pid)?,
            ae_v,
            row.interval(st, et, secs)?,
            row.point(x, y)?,
            range_v,
        )?);
        Ok(())
    })?;
    Ok(out)
}

pub fn load_requests(path: impl AsRef<Path>) -> Result<Vec<EnergyRequest>> {
    let path = path.as_ref();
    let (mut rdr, cols) = open(path)?;
    let rid = cols.require("rid")?;
    let cid = cols.require("cid")?;
    let re = cols.require("re_mAh")?;
    let (st, et, secs) = cols.time_columns()?;
    let x = cols.require("x_m")?;
    let y = cols.require("y_m")?;

    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for_each_row(&mut rdr, &cols, |row| {
        let id = row.str(rid)?.to_owned();
        if !seen.insert(id.clone()) {
            return Err(duplicate(path, &id, row.line));
        }
        let re_v: f64 = row.parse(re)?;
        if !(re_v.is_finite() && re_v > 0.0) {
            return Err(row.err(re, format!("must be > 0, got {re_v}")));
        }
        out.push(EnergyRequest::new(id, row.str(cid)?, re_v, row.interval(st, et, secs)?, row.point(x, y)?)?);
        Ok(())
    })?;
    Ok(out)
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn save_services(path: impl AsRef<Path>, services: &[EnergyService]) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record(SERVICES_HEADER)?;
    for s in services {
        w.write_record([
            s.eid().to_string(),
            s.pid().to_string(),
            s.ae().to_string(),
            s.window().st().to_string(),
            s.window().et().to_string(),
            s.location().x().to_string(),
            s.location().y().to_string(),
            s.range().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn save_requests(path: impl AsRef<Path>, requests: &[EnergyRequest]) -> Result<()> {
    let path = path.as_ref();
    let mut w = writer(path)?;
    w.write_record(REQUESTS_HEADER)?;
    for r in requests {
        w.write_record([
            r.rid().to_string(),
            r.cid().to_string(),
            r.re().to_string(),
            r.window().st().to_string(),
            r.window().et().to_string(),
            r.location().x().to_string(),
            r.location().y().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `services.csv` and `requests.csv` inside `dir`.
pub fn csv_paths(dir: &Path) -> (PathBuf, PathBuf) {
    (dir.join("services.csv"), dir.join("requests.csv"))
}

pub fn save_csv(dir: impl AsRef<Path>, services: &[EnergyService], requests: &[EnergyRequest]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (s, r) = csv_paths(dir);
    save_services(s, services)?;
    save_requests(r, requests)
}

pub fn load_csv(dir: impl AsRef<Path>) -> Result<(Vec<EnergyService>, Vec<EnergyRequest>)> {
    let (s, r) = csv_paths(dir.as_ref());
    Ok((load_services(s)?, load_requests(r)?))
}
