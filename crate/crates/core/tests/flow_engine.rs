mod common;
mod oracle;

use std::time::Duration;

use common::{random_instance, req, svc, window};
use flowcomp_core::flow::{
    build_network, compose_baseline_fcfs, compose_priority, extract_allocation, max_flow, verify_result, GreedyOptions,
    ServiceOrder,
};
use flowcomp_core::graph::{build_bipartite, build_partial_bipartite};
use flowcomp_core::{compose, compose_with, ComposeOptions, Mode};

fn value_of(services: &[flowcomp_core::EnergyService], requests: &[flowcomp_core::EnergyRequest]) -> f64 {
    max_flow(&build_network(build_bipartite(services, requests, window()))).value
}

#[test]
fn two_services_two_requests() {
    // S2 is out of range of R1.
    let services = vec![svc("S1", 10.0, (0, 60), 0.0), svc("S2", 5.0, (0, 60), 8.0)];
    let requests = vec![req("R1", 8.0, (10, 20), -4.0), req("R2", 12.0, (10, 20), 4.0)];
    let g = build_bipartite(&services, &requests, window());
    assert_eq!(g.edges().len(), 3);
    assert!(g.edge(&"S2".into(), &"R1".into()).is_none());
    let v = value_of(&services, &requests);
    assert_eq!(v, oracle::strict_instance_max_flow(&services, &requests, common::WINDOW));
    assert_eq!(v, 15.0);
}

#[test]
fn large_service_fills_single_request() {
    let services = vec![svc("ES1", 700.0, (0, 60), 0.0)];
    let requests = vec![req("ER1", 300.0, (10, 30), 1.0)];
    assert_eq!(value_of(&services, &requests), 300.0);
}

#[test]
fn no_edges_no_flow() {
    let services = vec![svc("S1", 10.0, (0, 10), 0.0)];
    let requests = vec![req("R1", 8.0, (50, 60), 0.0)];
    assert_eq!(value_of(&services, &requests), 0.0);
    assert_eq!(value_of(&[], &[]), 0.0);
}

#[test]
fn allocation_is_bounded_by_upstream_supply() {
    let services = vec![svc("ES2", 16.0, (10, 20), 0.0)];
    let requests = vec![req("ER2", 44.0, (0, 30), 0.0)];
    let net = build_network(build_bipartite(&services, &requests, window()));
    assert_eq!(net.arcs()[net.edge_arc(0)].capacity, 44.0);
    let fa = max_flow(&net);
    let r = extract_allocation(&fa, &net, Mode::Flow, window(), Duration::ZERO).unwrap();
    assert_eq!(r.allocations().len(), 1);
    assert_eq!(r.allocations()[0].amount, 16.0);
}

#[test]
fn zero_flow_gives_no_allocations() {
    let services = vec![svc("S1", 10.0, (0, 10), 0.0)];
    let requests = vec![req("R1", 8.0, (50, 60), 0.0)];
    let net = build_network(build_bipartite(&services, &requests, window()));
    let r = extract_allocation(&max_flow(&net), &net, Mode::Flow, window(), Duration::ZERO).unwrap();
    assert!(r.allocations().is_empty());
    assert!(r.serviceable_service_ids().is_empty());
}

#[test]
fn request_split_across_two_services() {
    let services = vec![svc("S1", 10.0, (0, 60), 0.0), svc("S2", 10.0, (0, 60), 1.0)];
    let requests = vec![req("R1", 15.0, (10, 20), 0.5)];
    let net = build_network(build_bipartite(&services, &requests, window()));
    let r = extract_allocation(&max_flow(&net), &net, Mode::Flow, window(), Duration::ZERO).unwrap();
    assert_eq!(r.allocations().len(), 2);
    let sum: f64 = r.allocations().iter().map(|a| a.amount).sum();
    assert_eq!(sum, 15.0);
    assert_eq!(r.total_allocated_for_request(&"R1".into()).unwrap(), 15.0);
}

#[test]
fn infeasible_flow_is_rejected() {
    let services = vec![svc("S1", 10.0, (0, 60), 0.0)];
    let requests = vec![req("R1", 15.0, (10, 20), 0.5)];
    let net = build_network(build_bipartite(&services, &requests, window()));
    let mut fa = max_flow(&net);
    fa.flow[net.edge_arc(0)] += 3.0;
    assert!(matches!(
        extract_allocation(&fa, &net, Mode::Flow, window(), Duration::ZERO),
        Err(flowcomp_core::Error::InvariantViolation(_))
    ));
}

#[test]
fn motivating_provider_serves_both_requests() {
    let services = vec![svc("ES1", 700.0, (0, 90), 0.0)];
    let requests = vec![req("ER1", 300.0, (10, 40), 1.0), req("ER2", 400.0, (30, 80), 2.0)];
    let r = compose(&services, &requests, window(), Mode::Flow).unwrap();
    assert_eq!(r.total_allocated(), 700.0);
    assert_eq!(oracle::strict_instance_max_flow(&services, &requests, common::WINDOW), 700.0);
}

#[test]
fn no_requests_leaves_services_unserviceable() {
    let services = vec![svc("S1", 10.0, (0, 60), 0.0)];
    for mode in Mode::ALL {
        let r = compose(&services, &[], window(), mode).unwrap();
        assert!(r.allocations().is_empty());
        assert!(r.serviceable_service_ids().is_empty());
        assert_eq!(r.services().len(), 1);
    }
}

/// ES1 reaches ER1 (earliest) and ER3 (largest) but can only fill one.
fn greedy_example() -> (Vec<flowcomp_core::EnergyService>, Vec<flowcomp_core::EnergyRequest>) {
    let services = vec![svc("ES1", 10.0, (0, 60), 0.0)];
    let requests = vec![
        req("ER1", 10.0, (5, 20), 1.0),
        req("ER2", 5.0, (10, 30), 20.0),
        req("ER3", 30.0, (30, 50), 1.0),
    ];
    (services, requests)
}

#[test]
fn fcfs_assigns_earliest_request() {
    let (s, r) = greedy_example();
    let net = build_network(build_bipartite(&s, &r, window()));
    let res = compose_baseline_fcfs(&net, window(), GreedyOptions::default()).unwrap();
    assert_eq!(res.allocations().len(), 1);
    assert_eq!(res.allocations()[0].rid.as_str(), "ER1");
    assert_eq!(res.mode(), Mode::Baseline);
}

#[test]
fn priority_assigns_largest_request() {
    let (s, r) = greedy_example();
    let net = build_network(build_bipartite(&s, &r, window()));
    let res = compose_priority(&net, window(), GreedyOptions::default()).unwrap();
    assert_eq!(res.allocations().len(), 1);
    assert_eq!(res.allocations()[0].rid.as_str(), "ER3");
    assert_eq!(res.allocations()[0].amount, 10.0);
}

#[test]
fn priority_ties_fall_back_to_rid() {
    let services = vec![svc("S1", 10.0, (0, 60), 0.0)];
    let requests = vec![req("Rb", 10.0, (5, 20), 1.0), req("Ra", 10.0, (30, 50), 1.0)];
    let net = build_network(build_bipartite(&services, &requests, window()));
    let a = compose_priority(&net, window(), GreedyOptions::default()).unwrap();
    let b = compose_priority(&net, window(), GreedyOptions::default()).unwrap();
    assert_eq!(a.allocations(), b.allocations());
    assert_eq!(a.allocations()[0].rid.as_str(), "Ra");
}

#[test]
fn single_pair_greedy_equals_flow() {
    let services = vec![svc("S1", 40.0, (0, 60), 0.0)];
    let requests = vec![req("R1", 25.0, (5, 20), 1.0)];
    let flow = compose(&services, &requests, window(), Mode::Flow).unwrap();
    for mode in [Mode::Baseline, Mode::Priority] {
        let g = compose(&services, &requests, window(), mode).unwrap();
        assert_eq!(g.allocations(), flow.allocations());
    }
}

#[test]
fn no_split_uses_one_service_per_request() {
    let services = vec![svc("S1", 10.0, (0, 60), 0.0), svc("S2", 10.0, (1, 60), 1.0)];
    let requests = vec![req("R1", 15.0, (10, 20), 0.5)];
    let opts = ComposeOptions {
        greedy: GreedyOptions {
            service_order: ServiceOrder::StartTime,
            allow_split: false,
        },
    };
    let r = compose_with(&services, &requests, window(), Mode::Baseline, opts).unwrap();
    assert_eq!(r.allocations().len(), 1);
    assert_eq!(r.allocations()[0].eid.as_str(), "S1");
    let split = compose(&services, &requests, window(), Mode::Baseline).unwrap();
    assert_eq!(split.total_allocated(), 15.0);
}

#[test]
fn largest_supply_order_prefers_big_service() {
    let services = vec![svc("S1", 5.0, (0, 60), 0.0), svc("S2", 50.0, (1, 60), 1.0)];
    let requests = vec![req("R1", 15.0, (10, 20), 0.5)];
    let opts = ComposeOptions {
        greedy: GreedyOptions {
            service_order: ServiceOrder::LargestSupply,
            allow_split: true,
        },
    };
    let r = compose_with(&services, &requests, window(), Mode::Baseline, opts).unwrap();
    assert_eq!(r.allocations().len(), 1);
    assert_eq!(r.allocations()[0].eid.as_str(), "S2");
}

#[test]
fn push_relabel_matches_edmonds_karp() {
    for seed in 0..500 {
        let (s, r) = random_instance(seed, 8, 8);
        let got = value_of(&s, &r);
        let want = oracle::strict_instance_max_flow(&s, &r, common::WINDOW);
        assert!((got - want).abs() <= 1e-9, "seed {seed}: {got} vs {want}");
    }
}

#[test]
fn random_five_by_ten_greedy_dominated() {
    for seed in 0..200 {
        let (s, r) = random_instance(1000 + seed, 5, 10);
        let best = oracle::strict_instance_max_flow(&s, &r, common::WINDOW);
        for mode in [Mode::Baseline, Mode::Priority] {
            let got = compose(&s, &r, window(), mode).unwrap().total_allocated();
            assert!(got <= best + 1e-9, "seed {seed} {mode}: {got} > {best}");
        }
    }
}

#[test]
fn all_modes_feasible_and_ordered() {
    for seed in 0..300 {
        let (s, r) = random_instance(5000 + seed, 20, 20);
        let mut totals = Vec::new();
        for mode in Mode::ALL {
            let res = compose(&s, &r, window(), mode).unwrap();
            let graph = flowcomp_core::flow::graph_for_mode(&s, &r, window(), mode);
            verify_result(&res, &graph).unwrap_or_else(|e| panic!("seed {seed} {mode}: {e}"));
            let by_service: f64 = res
                .services()
                .iter()
                .map(|x| res.total_allocated_for_service(x.eid()).unwrap())
                .sum();
            let by_request: f64 = res
                .requests()
                .iter()
                .map(|x| res.total_allocated_for_request(x.rid()).unwrap())
                .sum();
            assert!((by_service - res.total_allocated()).abs() < 1e-9);
            assert!((by_request - res.total_allocated()).abs() < 1e-9);
            totals.push((mode, res.total_allocated()));
        }
        flowcomp_core::experiment::check_dominance(&totals, 1e-9).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}

#[test]
fn flow_is_bounded_by_serviceable_supply_and_demand() {
    for seed in 0..200 {
        let (s, r) = random_instance(9000 + seed, 10, 10);
        let g = build_partial_bipartite(&s, &r, window());
        let ss = g.serviceable_services();
        let rs = g.serviceable_requests();
        let supply: f64 = g.services().iter().filter(|x| ss.contains(x.eid())).map(|x| x.ae()).sum();
        let demand: f64 = g.requests().iter().filter(|x| rs.contains(x.rid())).map(|x| x.re()).sum();
        let v = max_flow(&build_network(g)).value;
        assert!(v <= supply.min(demand) + 1e-9);
    }
}

#[test]
fn composition_is_deterministic() {
    let (s, r) = random_instance(77, 30, 30);
    for mode in Mode::ALL {
        let a = compose(&s, &r, window(), mode).unwrap();
        let b = compose(&s, &r, window(), mode).unwrap();
        assert_eq!(a.allocations(), b.allocations());
        let net = build_network(flowcomp_core::flow::graph_for_mode(&s, &r, window(), mode));
        assert_eq!(net.flow_dump_text(&max_flow(&net).flow), net.flow_dump_text(&max_flow(&net).flow));
    }
}

#[test]
fn flow_dump_format() {
    let services = vec![svc("S1", 10.0, (0, 60), 0.0)];
    let requests = vec![req("R1", 4.0, (10, 20), 0.5)];
    let net = build_network(build_bipartite(&services, &requests, window()));
    let fa = max_flow(&net);
    assert_eq!(net.flow_dump_text(&fa.flow), "R1,t,4,4\nS1,R1,4,4\ns,S1,4,10\n");
}

#[test]
fn partial_graph_flow_matches_edmonds_karp() {
    for seed in 0..300 {
        let (s, r) = random_instance(20_000 + seed, 8, 8);
        let g = build_partial_bipartite(&s, &r, window());
        let (n, m) = (g.services().len(), g.requests().len());
        let mut cap = vec![vec![0.0; 2 + n + m]; 2 + n + m];
        for (i, x) in g.services().iter().enumerate() {
            cap[0][2 + i] = x.ae();
        }
        for (j, x) in g.requests().iter().enumerate() {
            cap[2 + n + j][1] = x.re();
        }
        for e in g.edges() {
            cap[2 + e.service][2 + n + e.request] = e.weight;
        }
        let want = oracle::edmonds_karp(cap);
        let got = max_flow(&build_network(g)).value;
        assert!((got - want).abs() <= 1e-9 * want.max(1.0), "seed {seed}: {got} vs {want}");
    }
}
