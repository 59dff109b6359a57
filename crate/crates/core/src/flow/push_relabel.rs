//! FIFO push-relabel maximum flow with the gap heuristic.
//!
//! Capacities are real-valued. Residuals and excesses at or below
//! `REL_TOL * max(1, max capacity)` are treated as zero. Active nodes are
//! processed in FIFO order and each node scans its residual arcs in
//! ascending index order, so the resulting flow (not only its value) is
//! deterministic.

use std::collections::VecDeque;

use super::network::{FlowArc, FlowNetwork, SINK, SOURCE};
use crate::model::Mah;

pub const REL_TOL: f64 = 1e-9;

/// A feasible flow: `flow[a]` is the amount on arc `a` of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowAssignment {
    pub flow: Vec<Mah>,
    pub value: Mah,
}

impl FlowAssignment {
    pub fn on_arc(&self, arc: usize) -> Mah {
        self.flow[arc]
    }
}

/// Absolute zero-threshold for a network whose largest capacity is `max_cap`.
pub fn tolerance(max_cap: Mah) -> Mah {
    REL_TOL * max_cap.max(1.0)
}

pub fn max_flow(network: &FlowNetwork) -> FlowAssignment {
    push_relabel(network.node_count(), SOURCE, SINK, network.arcs())
}

/// Max flow from `s` to `t` on an arbitrary network of `n` nodes.
pub fn push_relabel(n: usize, s: usize, t: usize, arcs: &[FlowArc]) -> FlowAssignment {
    let mut solver = Solver::new(n, s, t, arcs);
    solver.run();
    let value = arcs
        .iter()
        .zip(&solver.flow)
        .map(|(a, &f)| {
            if a.to == t {
                f
            } else if a.from == t {
                -f
            } else {
                0.0
            }
        })
        .sum();
    FlowAssignment {
        flow: solver.flow,
        value,
    }
}

struct Solver<'a> {
    n: usize,
    s: usize,
    t: usize,
    arcs: &'a [FlowArc],
    eps: f64,
    flow: Vec<f64>,
    /// Residual edge ids per node; edge `2a` is arc `a` forward, `2a + 1` backward.
    adj: Vec<Vec<usize>>,
    height: Vec<usize>,
    excess: Vec<f64>,
    current: Vec<usize>,
    count: Vec<usize>,
    queue: VecDeque<usize>,
}

impl<'a> Solver<'a> {
    fn new(n: usize, s: usize, t: usize, arcs: &'a [FlowArc]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (a, arc) in arcs.iter().enumerate() {
            adj[arc.from].push(2 * a);
            adj[arc.to].push(2 * a + 1);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let max_cap = arcs.iter().map(|a| a.capacity).fold(0.0, f64::max);
        Self {
            n,
            s,
            t,
            arcs,
            eps: tolerance(max_cap),
            flow: vec![0.0; arcs.len()],
            adj,
            height: vec![0; n],
            excess: vec![0.0; n],
            current: vec![0; n],
            count: vec![0; 2 * n + 2],
            queue: VecDeque::new(),
        }
    }

    fn head(&self, e: usize) -> usize {
        let arc = &self.arcs[e / 2];
        if e.is_multiple_of(2) {
            arc.to
        } else {
            arc.from
        }
    }

    fn residual(&self, e: usize) -> f64 {
        let a = e / 2;
        if e.is_multiple_of(2) {
            self.arcs[a].capacity - self.flow[a]
        } else {
            self.flow[a]
        }
    }

    fn push_along(&mut self, e: usize, delta: f64) {
        let a = e / 2;
        let saturating = delta >= self.residual(e);
        if e.is_multiple_of(2) {
            self.flow[a] = if saturating { self.arcs[a].capacity } else { self.flow[a] + delta };
        } else {
            self.flow[a] = if saturating { 0.0 } else { self.flow[a] - delta };
        }
    }

    fn is_active(&self, v: usize) -> bool {
        v != self.s && v != self.t && self.excess[v] > self.eps
    }

    /// Exact distance labels from a reverse BFS out of the sink.
    fn initial_heights(&mut self) {
        let unreached = usize::MAX;
        self.height.fill(unreached);
        self.height[self.t] = 0;
        let mut bfs = VecDeque::from([self.t]);
        while let Some(v) = bfs.pop_front() {
            for &e in &self.adj[v] {
                // Residual edge u -> v is the reverse of e.
                let u = self.head(e);
                if self.height[u] == unreached && self.residual(e ^ 1) > self.eps {
                    self.height[u] = self.height[v] + 1;
                    bfs.push_back(u);
                }
            }
        }
        for h in &mut self.height {
            if *h == unreached {
                *h = self.n + 1;
            }
        }
        self.height[self.s] = self.n;
        for v in 0..self.n {
            self.count[self.height[v]] += 1;
        }
    }

    fn run(&mut self) {
        if self.n == 0 || self.s == self.t {
            return;
        }
        self.initial_heights();
        for i in 0..self.adj[self.s].len() {
            let e = self.adj[self.s][i];
            let r = self.residual(e);
            if e.is_multiple_of(2) && r > self.eps {
                let v = self.head(e);
                let was_active = self.is_active(v);
                self.push_along(e, r);
                self.excess[v] += r;
                self.excess[self.s] -= r;
                if !was_active && self.is_active(v) {
                    self.queue.push_back(v);
                }
            }
        }
        while let Some(u) = self.queue.pop_front() {
            self.discharge(u);
        }
    }

    fn discharge(&mut self, u: usize) {
        while self.is_active(u) {
            if self.current[u] == self.adj[u].len() {
                self.relabel(u);
                self.current[u] = 0;
                continue;
            }
            let e = self.adj[u][self.current[u]];
            let v = self.head(e);
            let r = self.residual(e);
            if r > self.eps && self.height[u] == self.height[v] + 1 {
                let delta = self.excess[u].min(r);
                let was_active = self.is_active(v);
                self.push_along(e, delta);
                self.excess[u] -= delta;
                self.excess[v] += delta;
                if !was_active && self.is_active(v) {
                    self.queue.push_back(v);
                }
                if delta < r {
                    // Non-saturating push empties u.
                    continue;
                }
            }
            self.current[u] += 1;
        }
    }

    fn relabel(&mut self, u: usize) {
        let old = self.height[u];
        let mut best = usize::MAX;
        for &e in &self.adj[u] {
            if self.residual(e) > self.eps {
                best = best.min(self.height[self.head(e)]);
            }
        }
        // An active node always has a residual path back to the source.
        debug_assert!(best != usize::MAX);
        let new = best.saturating_add(1).min(2 * self.n + 1);
        self.count[old] -= 1;
        self.height[u] = new;
        self.count[new] += 1;

        if self.count[old] == 0 && old < self.n {
            // Gap: nothing between `old` and the source level can reach the sink.
            for v in 0..self.n {
                let h = self.height[v];
                if h > old && h < self.n && v != self.s {
                    self.count[h] -= 1;
                    self.height[v] = self.n + 1;
                    self.count[self.n + 1] += 1;
                }
            }
        }
    }
}
