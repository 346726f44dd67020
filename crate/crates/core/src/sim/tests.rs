use super::*;
use crate::tables::ProbRow;
use crate::topology::{loop_free_first_hops, GeneratorSpec};

fn cfg(spec: GeneratorSpec, protocol: ProtocolKind) -> ScenarioConfig {
    ScenarioConfig { topology: TopologySource::Spec(spec), protocol, ..ScenarioConfig::default() }
}

#[test]
fn zero_duration_is_rejected() {
    let mut c = cfg(GeneratorSpec::LinearChain(3), ProtocolKind::Ants);
    c.duration_ms = 0.0;
    assert!(matches!(Engine::new(c), Err(SimError::Config(_))));
}

#[test]
fn idle_scenario_reports_zero_counters() {
    let mut c = cfg(GeneratorSpec::LinearChain(3), ProtocolKind::Ants);
    c.duration_ms = 1.0;
    c.ants.rate = 0.0;
    let out = run_scenario(c).unwrap();
    assert_eq!(out.report.packets, PacketCounters::default());
    assert_eq!(out.report.messages, MessageCounters::default());
    assert_eq!(out.report.events_processed, 1);
    assert_eq!(out.report.coverage, 1.0);
}

#[test]
fn disconnected_topology_is_a_runtime_error() {
    let t = load_topology("node 0\nnode 1\n").unwrap();
    let c = ScenarioConfig { topology: TopologySource::Given(t), ..ScenarioConfig::default() };
    let err = Engine::new(c).err().unwrap();
    assert!(matches!(err, SimError::Disconnected));
    assert!(!err.is_config_error());
}

#[test]
fn same_seed_same_everything() {
    let mut c = cfg(GeneratorSpec::Ring(5), ProtocolKind::Ants);
    c.ants.uniform_fraction = 0.5;
    c.data.rate = 0.01;
    c.duration_ms = 400.0;
    c.snapshot_ms = 50.0;
    let a = run_scenario(c.clone()).unwrap();
    let b = run_scenario(c.clone()).unwrap();
    assert_eq!(a.event_log_hash, b.event_log_hash);
    assert_eq!(a.report.to_json(), b.report.to_json());
    assert_eq!(a.tables_dump, b.tables_dump);
    c.seed += 1;
    assert_ne!(run_scenario(c).unwrap().event_log_hash, a.event_log_hash);
}

#[test]
fn uniform_ants_keep_every_entry_alive_on_complete3() {
    let mut c = cfg(GeneratorSpec::Complete(3), ProtocolKind::Ants);
    c.ants.uniform_fraction = 1.0;
    c.ants.rate = 1.0;
    c.ants.max_ants = Some(10_000);
    c.duration_ms = 1e6;
    let out = run_scenario(c).unwrap();
    assert_eq!(out.report.messages.ants_generated, 10_000);
    let tables = out.engine.prob_tables();
    for (_, _, row) in tables.iter() {
        assert!(row.as_slice().iter().all(|&p| p >= 0.05), "{row:?}");
    }
}

#[test]
fn stepping() {
    let mut c = cfg(GeneratorSpec::LinearChain(2), ProtocolKind::Ants);
    c.ants.rate = 0.0;
    c.duration_ms = 10.0;
    let mut e = Engine::new(c).unwrap();
    e.schedule(ms_to_ticks(5.0), EventKind::AntGeneration { router: RouterId(0) });
    let Step::Processed(ev) = e.step().unwrap() else { panic!() };
    assert_eq!(ev.kind, EventKind::AntGeneration { router: RouterId(0) });
    assert_eq!(e.now(), ms_to_ticks(5.0));
    e.run_to_end().unwrap();
    assert_eq!(e.step().unwrap(), Step::Exhausted);
}

#[test]
fn clock_never_goes_backwards() {
    let mut c = cfg(GeneratorSpec::Ring(4), ProtocolKind::Ants);
    c.data.rate = 0.05;
    c.duration_ms = 200.0;
    let mut e = Engine::new(c).unwrap();
    let mut last = 0;
    while let Step::Processed(ev) = e.step().unwrap() {
        assert!(ev.time >= last);
        last = ev.time;
    }
}

fn static_tables_file(dir: &tempfile::TempDir, t: &Topology, tables: &ProbTables) -> std::path::PathBuf {
    let p = dir.path().join("tables.dump");
    std::fs::write(&p, tables.dump(t)).unwrap();
    p
}

#[test]
fn deflection_uses_a_free_link_when_the_best_is_busy() {
    let t = generate(&GeneratorSpec::Complete(4)).unwrap();
    let mut tables = ProbTables::init_uniform(&t).unwrap();
    tables.set_row(RouterId(0), RouterId(1), Some(ProbRow::new(vec![1.0, 0.0, 0.0]).unwrap()));
    let dir = tempfile::tempdir().unwrap();
    let mut c = ScenarioConfig {
        topology: TopologySource::Given(t),
        protocol: ProtocolKind::Static,
        forward_policy: ForwardPolicy::Deflection,
        static_tables: Some(static_tables_file(&dir, &generate(&GeneratorSpec::Complete(4)).unwrap(), &tables)),
        ..ScenarioConfig::default()
    };
    c.duration_ms = 50.0;
    let mut e = Engine::new(c).unwrap();
    for id in 0..2 {
        let packet = Packet {
            id,
            source: RouterId(0),
            destination: RouterId(1),
            hop_budget: 8,
            trace: Vec::new(),
            created_at: 0,
            delivered_at: None,
        };
        e.schedule(0, EventKind::PacketArrival { packet, router: RouterId(0), arrival: None });
    }
    e.run_to_end().unwrap();
    let traces: Vec<&Vec<RouterId>> = e.finished_packets().iter().map(|f| &f.trace).collect();
    assert_eq!(traces[0], &vec![RouterId(0), RouterId(1)]);
    assert_ne!(traces[1][1], RouterId(1));
}

#[test]
fn anytime_coverage_at_time_zero() {
    let spec = GeneratorSpec::RandomConnected { n: 7, edge_prob: 0.4, cost_min: 1, cost_max: 4, seed: 5 };
    let ants = Engine::new(cfg(spec.clone(), ProtocolKind::Ants)).unwrap();
    assert_eq!(ants.anytime_snapshot().unwrap(), 1.0);

    // Distance-vector starts out knowing only its neighbors: each adjacent
    // (router, destination) pair contributes one covered first hop.
    let t = generate(&spec).unwrap();
    let mut valid = 0;
    let mut adjacent = 0;
    for r in t.routers() {
        for d in t.routers().filter(|&d| d != r) {
            valid += loop_free_first_hops(&t, r, d).len();
            if t.interfaces_to(r, d).next().is_some() {
                adjacent += 1;
            }
        }
    }
    let dv = Engine::new(cfg(spec, ProtocolKind::DistanceVector)).unwrap();
    assert_eq!(dv.anytime_snapshot().unwrap(), adjacent as f64 / valid as f64);
}

#[test]
fn regular_ants_narrow_coverage_over_time() {
    let mut c = cfg(GeneratorSpec::LinearChain(5), ProtocolKind::Ants);
    c.ants.rate = 0.5;
    c.duration_ms = 400.0;
    c.snapshot_ms = 100.0;
    let out = run_scenario(c).unwrap();
    let curve = &out.report.coverage_curve;
    assert_eq!(curve[0], (0.0, 1.0));
    // On a chain every router-destination pair has exactly one valid first
    // hop, so coverage stays complete while the wrong-way mass drains.
    assert!(curve.iter().all(|&(_, c)| c == 1.0));
}

#[test]
fn packets_are_conserved_and_data_never_touches_ant_tables() {
    let mut c = cfg(GeneratorSpec::Ring(5), ProtocolKind::Ants);
    c.ants.rate = 0.0;
    c.data.rate = 0.2;
    c.data.hop_budget = 6;
    c.duration_ms = 300.0;
    let out = run_scenario(c).unwrap();
    let p = &out.report.packets;
    assert!(p.generated > 0 && p.dropped_ttl > 0 && p.in_flight > 0);
    assert!(p.conserved(), "{p:?}");
    let t = generate(&GeneratorSpec::Ring(5)).unwrap();
    assert_eq!(out.engine.prob_tables(), ProbTables::init_uniform(&t).unwrap());
}

#[test]
fn q_routing_learns_from_data() {
    let mut c = cfg(GeneratorSpec::LinearChain(3), ProtocolKind::QRouting);
    c.data.pairs = vec![(0, 2, 0.1)];
    c.duration_ms = 500.0;
    let out = run_scenario(c).unwrap();
    let q = out.engine.q_table().unwrap();
    // Two unit links with no queueing: the estimate settles at 2 ms.
    let est = q.get(RouterId(0), RouterId(2), 0);
    assert!((est - 2.0).abs() < 1e-3, "{est} {:?}", out.report.packets);
    // One estimate per data transmission.
    let hops: usize = out.engine.finished_packets().iter().map(|f| f.trace.len() - 1).sum();
    assert_eq!(out.report.packets.in_flight, 0);
    assert_eq!(out.report.messages.q_estimates, hops as u64);
}

#[test]
fn deterministic_engines_converge_to_link_state() {
    let spec = GeneratorSpec::RandomConnected { n: 8, edge_prob: 0.35, cost_min: 1, cost_max: 5, seed: 9 };
    let t = generate(&spec).unwrap();
    let oracle = det_as_prob(&run_link_state(&t).unwrap().tables, &t, None);
    for p in [ProtocolKind::LinkState, ProtocolKind::DistanceVector, ProtocolKind::PathVector] {
        let mut c = cfg(spec.clone(), p);
        c.duration_ms = 100.0;
        let out = run_scenario(c).unwrap();
        assert!(out.report.convergence_time_ms.is_some(), "{p:?}");
        assert_eq!(out.engine.prob_tables(), oracle, "{p:?}");
    }
}

#[test]
fn router_removal_counts_to_infinity_in_the_engine() {
    let mut c = cfg(GeneratorSpec::LinearChain(4), ProtocolKind::DistanceVector);
    c.changes = vec![TopologyChange { at_ms: 10.0, kind: ChangeKind::RemoveRouter(3) }];
    c.duration_ms = 100.0;
    let out = run_scenario(c).unwrap();
    // Converged at round 3 (t = 2 ms), then counting to 16 takes many more.
    let conv = out.report.convergence_time_ms.unwrap();
    assert!(conv > 20.0, "{conv}");
    assert!(out.engine.prob_tables().row(RouterId(0), RouterId(3)).is_none());
}

#[test]
fn update_trace_lists_reinforcements() {
    let mut c = cfg(GeneratorSpec::LinearChain(2), ProtocolKind::Ants);
    c.ants.max_ants = Some(3);
    c.duration_ms = 1000.0;
    let mut e = Engine::new(c).unwrap();
    e.record_updates();
    e.run_to_end().unwrap();
    let csv = e.update_trace_csv();
    assert_eq!(csv.lines().count(), 4, "{csv}");
    assert!(csv.starts_with("time,router,row_dest,interface,delta,p_after\n"));
}

