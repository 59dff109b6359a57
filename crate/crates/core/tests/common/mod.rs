#![allow(dead_code)]

use flowcomp_core::{CompositionWindow, EnergyRequest, EnergyService, GeoPoint, TimeInterval};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WINDOW: (i64, i64) = (0, 100);

pub fn window() -> CompositionWindow {
    CompositionWindow::from_bounds(WINDOW.0, WINDOW.1).unwrap()
}

pub fn t(st: i64, et: i64) -> TimeInterval {
    TimeInterval::new(st, et).unwrap()
}

pub fn svc(eid: &str, ae: f64, (st, et): (i64, i64), x: f64) -> EnergyService {
    EnergyService::new(eid, "p", ae, t(st, et), GeoPoint::new(x, 0.0).unwrap(), 5.0).unwrap()
}

pub fn req(rid: &str, re: f64, (st, et): (i64, i64), x: f64) -> EnergyRequest {
    EnergyRequest::new(rid, "c", re, t(st, et), GeoPoint::new(x, 0.0).unwrap()).unwrap()
}

/// Random instance with integer energies in 1..=100 and up to the given counts.
/// A few entities fall partly outside the window.
pub fn random_instance(seed: u64, max_services: usize, max_requests: usize) -> (Vec<EnergyService>, Vec<EnergyRequest>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(0..=max_services);
    let m = rng.random_range(0..=max_requests);
    let interval = |rng: &mut ChaCha8Rng| {
        let st = rng.random_range(0..95);
        let len = rng.random_range(5..=40);
        t(st, st + len)
    };
    let services = (0..n)
        .map(|i| {
            let w = interval(&mut rng);
            let p = GeoPoint::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)).unwrap();
            let range = rng.random_range(3.0..7.0);
            EnergyService::new(format!("S{i:02}"), format!("P{i:02}"), rng.random_range(1..=100) as f64, w, p, range).unwrap()
        })
        .collect();
    let requests = (0..m)
        .map(|j| {
            let w = interval(&mut rng);
            let p = GeoPoint::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)).unwrap();
            EnergyRequest::new(format!("R{j:02}"), format!("C{j:02}"), rng.random_range(1..=100) as f64, w, p).unwrap()
        })
        .collect();
    (services, requests)
}
