//! Cross-module invariants on randomly generated topologies.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reachsim::deterministic::{run_distance_vector, run_link_state, run_path_vector};
use reachsim::rl::{ant_prob_update, process_forward_ant, Ant, AntAction, AntLearning, AntMode};
use reachsim::sim::{run_scenario, ProtocolKind, ScenarioConfig, TopologySource};
use reachsim::tables::ProbTables;
use reachsim::topology::{enumerate_loop_free_paths, generate, GeneratorSpec};
use reachsim::{Cost, RouterId, Topology};

fn random_spec() -> impl Strategy<Value = GeneratorSpec> {
    (2usize..9, 0.2f64..0.8, 1u64..4, 0u64..6, any::<u64>()).prop_map(|(n, p, lo, extra, seed)| {
        GeneratorSpec::RandomConnected { n, edge_prob: p, cost_min: lo, cost_max: lo + extra, seed }
    })
}

/// All-pairs cheapest costs in scaled units; `u64::MAX` when unreachable.
fn floyd(t: &Topology) -> Vec<Vec<u64>> {
    let n = t.router_count();
    let mut d = vec![vec![u64::MAX; n]; n];
    for r in 0..n {
        d[r][r] = 0;
        for p in t.ports(RouterId(r)) {
            d[r][p.neighbor.0] = d[r][p.neighbor.0].min(p.cost_out.units());
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != u64::MAX && d[k][j] != u64::MAX {
                    d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                }
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ant_update_keeps_a_distribution(
        raw in prop::collection::vec(0.01f64..1.0, 1..8),
        pick in any::<prop::sample::Index>(),
        delta in 0.0f64..50.0,
    ) {
        let total: f64 = raw.iter().sum();
        let row: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let k = pick.index(row.len());
        let next = ant_prob_update(&row, k, delta).unwrap();
        prop_assert!((next.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(next.iter().all(|&p| p > 0.0 && p <= 1.0));
        prop_assert!(next[k] >= row[k]);
        for (i, (&a, &b)) in row.iter().zip(&next).enumerate() {
            if i != k {
                prop_assert!((b - a / (1.0 + delta)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deterministic_protocols_find_cheapest_costs(spec in random_spec()) {
        let t = generate(&spec).unwrap();
        let d = floyd(&t);
        let dv = run_distance_vector(&t, Cost::from_int(1_000_000), 64);
        prop_assert!(dv.converged);
        let ls = run_link_state(&t).unwrap();
        let pv = run_path_vector(&t, 64).unwrap();
        prop_assert!(pv.converged);
        for r in t.routers() {
            for dst in t.routers().filter(|&x| x != r) {
                let want = d[r.0][dst.0];
                let e = dv.tables[r.0].get(dst).unwrap();
                prop_assert_eq!(e.cost.units(), want);
                // The chosen neighbor really lies on a cheapest path.
                let p = t.port(r, e.interface);
                prop_assert_eq!(p.cost_out.units() + d[p.neighbor.0][dst.0], want);
                prop_assert_eq!(ls.tables[r.0].get(dst).unwrap().cost.units(), want);
                prop_assert_eq!(pv.tables[r.0].best(dst).unwrap().cost.units(), want);
            }
        }
    }

    #[test]
    fn enumerated_paths_are_simple_distinct_and_include_the_cheapest(spec in random_spec()) {
        let t = generate(&spec).unwrap();
        let d = floyd(&t);
        let (s, dst) = (RouterId(0), RouterId(t.router_count() - 1));
        let e = enumerate_loop_free_paths(&t, s, dst, None);
        prop_assert!(!e.truncated);
        prop_assert!(e.paths.iter().all(|p| p.replay(&t)));
        let mut seqs: Vec<Vec<RouterId>> = e.paths.iter().map(|p| p.routers()).collect();
        let n = seqs.len();
        seqs.sort();
        seqs.dedup();
        prop_assert_eq!(seqs.len(), n);
        let best = e.paths.iter().map(|p| p.total_cost.units()).min().unwrap();
        prop_assert_eq!(best, d[s.0][dst.0]);
    }

    #[test]
    fn ant_walks_keep_every_row_normalized(spec in random_spec(), seed in any::<u64>(), uniform in any::<bool>()) {
        let t = generate(&spec).unwrap();
        let mut tables = ProbTables::init_uniform(&t).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let learning = AntLearning::default();
        let n = t.router_count();
        let mode = if uniform { AntMode::Uniform } else { AntMode::Regular };
        for k in 0..200 {
            let (src, dst) = (RouterId(k % n), RouterId((k * 7 + 1) % n));
            if src == dst {
                continue;
            }
            let mut ant = Ant::new(src, dst, mode, 32, false);
            let (mut at, mut arrival) = (src, None);
            loop {
                let step = process_forward_ant(&t, &mut tables, at, &mut ant, arrival, &learning, &mut rng).unwrap();
                let AntAction::Forward(i) = step.action else { break };
                let port = t.port(at, i);
                (at, arrival) = (port.neighbor, Some(port.peer));
            }
        }
        for (_, _, row) in tables.iter() {
            prop_assert!((row.sum() - 1.0).abs() < 1e-9);
            prop_assert!(row.as_slice().iter().all(|&p| p > 0.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn scenarios_replay_from_their_seed(spec in random_spec(), seed in any::<u64>(), mix in 0.0f64..=1.0) {
        let mut cfg = ScenarioConfig { topology: TopologySource::Spec(spec), protocol: ProtocolKind::Ants, seed, ..ScenarioConfig::default() };
        cfg.ants.uniform_fraction = mix;
        cfg.data.rate = 0.01;
        cfg.duration_ms = 150.0;
        let a = run_scenario(cfg.clone()).unwrap();
        let b = run_scenario(cfg).unwrap();
        prop_assert_eq!(a.event_log_hash, b.event_log_hash);
        prop_assert_eq!(a.tables_dump, b.tables_dump);
        prop_assert!(a.report.packets.conserved());
    }
}
