//! Independent reference implementations used only by tests.

#![allow(dead_code)]

use std::collections::VecDeque;

use flowcomp_core::{EnergyRequest, EnergyService};

/// Edmonds-Karp on a dense capacity matrix. Node 0 is the source, node 1 the sink.
pub fn edmonds_karp(mut cap: Vec<Vec<f64>>) -> f64 {
    let n = cap.len();
    let (s, t) = (0, 1);
    let mut total = 0.0;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if parent[v] == usize::MAX && cap[u][v] > 1e-12 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            return total;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = t;
        while v != s {
            let u = parent[v];
            bottleneck = bottleneck.min(cap[u][v]);
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = parent[v];
            cap[u][v] -= bottleneck;
            cap[v][u] += bottleneck;
            v = u;
        }
        total += bottleneck;
    }
}

/// Max flow of the strict composition instance, built straight from the
/// predicates rather than from the library's graph or network types.
pub fn strict_instance_max_flow(services: &[EnergyService], requests: &[EnergyRequest], window: (i64, i64)) -> f64 {
    let inside = |st: i64, et: i64| st >= window.0 && et <= window.1;
    let services: Vec<_> = services.iter().filter(|s| inside(s.window().st(), s.window().et())).collect();
    let requests: Vec<_> = requests.iter().filter(|r| inside(r.window().st(), r.window().et())).collect();
    let n = 2 + services.len() + requests.len();
    let mut cap = vec![vec![0.0; n]; n];
    for (i, s) in services.iter().enumerate() {
        cap[0][2 + i] = s.ae();
        for (j, r) in requests.iter().enumerate() {
            let dx = s.location().x() - r.location().x();
            let dy = s.location().y() - r.location().y();
            let near = (dx * dx + dy * dy).sqrt() <= s.range();
            let (a, b) = (s.window(), r.window());
            let nested = (a.st() >= b.st() && a.et() <= b.et()) || (b.st() >= a.st() && b.et() <= a.et());
            if near && nested {
                cap[2 + i][2 + services.len() + j] = r.re();
            }
        }
    }
    for (j, r) in requests.iter().enumerate() {
        cap[2 + services.len() + j][1] = r.re();
    }
    edmonds_karp(cap)
}
