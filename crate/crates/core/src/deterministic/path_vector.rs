use serde::Serialize;

use super::{remap_interfaces, CountTrace, CountTraceRow, DeterministicError};
use crate::cost::Cost;
use crate::tables::{PathVector, PathVectorTable};
use crate::topology::{RouterId, Topology};

/// One synchronous path-vector round.
///
/// Each router advertises only its best vector per destination. A receiver
/// prepends itself, discards any vector that already contains it, and
/// rebuilds its ordered lists from what its neighbors currently advertise.
pub fn pv_round(states: &[PathVectorTable], t: &Topology) -> (Vec<PathVectorTable>, bool) {
    let next: Vec<PathVectorTable> = t
        .routers()
        .map(|x| {
            let mut table = PathVectorTable::empty(t.router_count());
            for (i, p) in t.ports(x).iter().enumerate() {
                let y = p.neighbor;
                table.insert(y, PathVector { cost: p.cost_out, routers: vec![x, y], interface: i });
                for d in t.routers().filter(|&d| d != x && d != y) {
                    let Some(best) = states[y.0].best(d) else { continue };
                    if best.routers.contains(&x) {
                        continue;
                    }
                    let mut routers = Vec::with_capacity(best.routers.len() + 1);
                    routers.push(x);
                    routers.extend_from_slice(&best.routers);
                    table.insert(d, PathVector { cost: p.cost_out + best.cost, routers, interface: i });
                }
            }
            table
        })
        .collect();
    let changed = next.as_slice() != states;
    (next, changed)
}

#[derive(Clone, Debug, Serialize)]
pub struct PvRun {
    pub tables: Vec<PathVectorTable>,
    pub rounds_used: usize,
    pub converged: bool,
}

/// Runs [`pv_round`] from empty tables to a fixpoint. Selection is by total
/// cost, ties broken by the lexicographically smaller router sequence.
pub fn run_path_vector(t: &Topology, max_rounds: usize) -> Result<PvRun, DeterministicError> {
    if !t.is_connected() {
        return Err(DeterministicError::Disconnected);
    }
    let start = vec![PathVectorTable::empty(t.router_count()); t.router_count()];
    Ok(iterate(t, start, max_rounds))
}

fn iterate(t: &Topology, mut state: Vec<PathVectorTable>, max_rounds: usize) -> PvRun {
    let mut rounds_used = 0;
    loop {
        let (next, changed) = pv_round(&state, t);
        if !changed {
            return PvRun { tables: state, rounds_used, converged: true };
        }
        if rounds_used == max_rounds {
            return PvRun { tables: state, rounds_used, converged: false };
        }
        state = next;
        rounds_used += 1;
    }
}

/// Path-vector counterpart of the distance-vector count-to-infinity run: after
/// `removed` loses its links, routers keep exchanging best vectors until no
/// vector reaches it. `infinity_bound` is only used to report unreachable.
pub fn simulate_path_vector_withdrawal(
    t: &Topology,
    removed: RouterId,
    infinity_bound: Cost,
) -> Result<CountTrace, DeterministicError> {
    if removed.0 >= t.router_count() {
        return Err(DeterministicError::UnknownRouter(removed));
    }
    let guard = t.router_count() + 2;
    let before = iterate(t, vec![PathVectorTable::empty(t.router_count()); t.router_count()], guard).tables;
    let after_t = t.isolate_router(removed);
    let mut state: Vec<PathVectorTable> = before
        .iter()
        .enumerate()
        .map(|(r, table)| {
            let mut fresh = PathVectorTable::empty(t.router_count());
            if r == removed.0 {
                return fresh;
            }
            for (d, list) in table.lists.iter().enumerate() {
                for pv in list {
                    if let Some(i) = remap_interfaces(t, &after_t, RouterId(r), pv.interface) {
                        fresh.insert(RouterId(d), PathVector { interface: i, ..pv.clone() });
                    }
                }
            }
            fresh
        })
        .collect();
    let reaches = |s: &[PathVectorTable]| s.iter().any(|tb| tb.best(removed).is_some());
    let mut trace = CountTrace { removed, rows: Vec::new(), resolved: true };
    if !reaches(&state) {
        return Ok(trace);
    }
    for round in 1..=guard {
        state = pv_round(&state, &after_t).0;
        let costs = state.iter().map(|tb| tb.best(removed).map_or(infinity_bound, |pv| pv.cost)).collect();
        trace.rows.push(CountTraceRow { round, costs });
        if !reaches(&state) {
            return Ok(trace);
        }
    }
    trace.resolved = false;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deterministic::run_link_state;
    use crate::topology::{generate, GeneratorSpec};

    #[test]
    fn complete3_prefers_direct_vector() {
        let t = generate(&GeneratorSpec::Complete(3)).unwrap();
        let run = run_path_vector(&t, 10).unwrap();
        assert!(run.converged);
        let best = run.tables[0].best(RouterId(1)).unwrap();
        assert_eq!(best.routers, vec![RouterId(0), RouterId(1)]);
        // The alternative through 2 is kept behind it.
        assert_eq!(run.tables[0].lists[1].len(), 2);
    }

    #[test]
    fn vectors_containing_receiver_are_discarded() {
        let t = generate(&GeneratorSpec::LinearChain(3)).unwrap();
        let mut state = vec![PathVectorTable::empty(3); 3];
        // Router 1 advertises a route to 2 that runs back through 0.
        state[1].insert(
            RouterId(2),
            PathVector { cost: Cost::from_int(3), routers: vec![RouterId(1), RouterId(0), RouterId(2)], interface: 0 },
        );
        let (next, _) = pv_round(&state, &t);
        assert!(next[0].best(RouterId(2)).is_none());
    }

    #[test]
    fn best_costs_match_link_state() {
        for seed in 0..15 {
            let t = generate(&GeneratorSpec::RandomConnected { n: 8, edge_prob: 0.35, cost_min: 1, cost_max: 9, seed })
                .unwrap();
            let pv = run_path_vector(&t, 64).unwrap();
            let ls = run_link_state(&t).unwrap();
            for x in t.routers() {
                for d in t.routers().filter(|&d| d != x) {
                    assert_eq!(pv.tables[x.0].best(d).unwrap().cost, ls.tables[x.0].get(d).unwrap().cost);
                }
            }
        }
    }

    #[test]
    fn withdrawal_on_chain_has_no_counting() {
        let t = generate(&GeneratorSpec::LinearChain(4)).unwrap();
        let trace = simulate_path_vector_withdrawal(&t, RouterId(3), Cost::from_int(16)).unwrap();
        assert!(trace.resolved);
        assert_eq!(trace.rows.len(), 2);
        // Finite costs never grow before the route disappears.
        for k in 0..3 {
            let finite: Vec<Cost> =
                trace.rows.iter().map(|r| r.costs[k]).filter(|&c| c < Cost::from_int(16)).collect();
            assert!(finite.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}
