use serde::Serialize;

use super::{remap_interfaces, CountTrace, CountTraceRow, DeterministicError};
use crate::cost::Cost;
use crate::tables::{DetEntry, DetTable};
use crate::topology::{RouterId, Topology};

/// RIP's unreachable metric.
pub const DEFAULT_INFINITY: Cost = Cost::from_int(16);

/// Tables before any advertisement has been exchanged: every destination is
/// unreachable.
pub fn dv_cold_start(t: &Topology) -> Vec<DetTable> {
    vec![DetTable::empty(t.router_count()); t.router_count()]
}

/// One synchronous round of distributed Bellman-Ford.
///
/// Every router advertises its whole table (itself at cost 0, missing entries
/// at `infinity_bound`) on every interface, and every receiver recomputes each
/// entry as the minimum over neighbors of link cost plus advertised cost.
/// Results at or above the bound are unreachable (`None`). Ties go to the
/// lowest neighbor id, then the lowest interface index.
pub fn dv_round(states: &[DetTable], t: &Topology, infinity_bound: Cost) -> (Vec<DetTable>, bool) {
    let next: Vec<DetTable> = t
        .routers()
        .map(|x| {
            let mut table = DetTable::empty(t.router_count());
            for d in t.routers().filter(|&d| d != x) {
                let mut best: Option<(Cost, RouterId, usize)> = None;
                for (i, p) in t.ports(x).iter().enumerate() {
                    let advertised = if p.neighbor == d {
                        Cost::ZERO
                    } else {
                        match states[p.neighbor.0].get(d) {
                            Some(e) => e.cost,
                            None => continue,
                        }
                    };
                    let cand = p.cost_out.saturating_add(advertised);
                    if cand >= infinity_bound {
                        continue;
                    }
                    let key = (cand, p.neighbor, i);
                    if best.is_none_or(|b| key < b) {
                        best = Some(key);
                    }
                }
                table.entries[d.0] = best.map(|(cost, _, interface)| DetEntry { interface, cost });
            }
            table
        })
        .collect();
    let changed = next.as_slice() != states;
    (next, changed)
}

/// Entries carried by one round of advertisements: every router sends its
/// `R - 1` entries on each of its interfaces.
pub fn dv_round_messages(t: &Topology) -> usize {
    let entries = t.router_count().saturating_sub(1);
    t.routers().map(|r| t.degree(r) * entries).sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct DvRun {
    pub tables: Vec<DetTable>,
    /// Rounds that changed some table.
    pub rounds_used: usize,
    pub converged: bool,
    /// Messages of each executed round, including the final quiet round.
    pub per_round_messages: Vec<usize>,
    /// Tables after each round; `history[0]` is the cold start.
    pub history: Vec<Vec<DetTable>>,
}

/// Iterates [`dv_round`] from a cold start until a round changes nothing or
/// `max_rounds` rounds have run. Non-convergence is reported in the result.
pub fn run_distance_vector(t: &Topology, infinity_bound: Cost, max_rounds: usize) -> DvRun {
    iterate(t, dv_cold_start(t), infinity_bound, max_rounds)
}

fn iterate(t: &Topology, start: Vec<DetTable>, infinity_bound: Cost, max_rounds: usize) -> DvRun {
    let mut history = vec![start];
    let mut per_round_messages = Vec::new();
    let mut rounds_used = 0;
    let mut converged = false;
    for _ in 0..=max_rounds {
        let (next, changed) = dv_round(history.last().unwrap(), t, infinity_bound);
        per_round_messages.push(dv_round_messages(t));
        if !changed {
            converged = true;
            break;
        }
        if rounds_used == max_rounds {
            break;
        }
        rounds_used += 1;
        history.push(next);
    }
    DvRun { tables: history.last().unwrap().clone(), rounds_used, converged, per_round_messages, history }
}

/// Converges distance-vector on `t`, removes every link of `removed`, and
/// keeps running rounds until no router can reach `removed` any more.
///
/// Routers adjacent to the removed router drop routes through it at once
/// (link-down detection); nothing else is mitigated. Row `k` of the trace
/// holds every router's cost to `removed` after round `k` (starting at 1),
/// with unreachable reported as the bound. The trace is empty when nobody
/// could reach `removed` in the first place.
pub fn simulate_count_to_infinity(
    t: &Topology,
    removed: RouterId,
    infinity_bound: Cost,
) -> Result<CountTrace, DeterministicError> {
    if removed.0 >= t.router_count() {
        return Err(DeterministicError::UnknownRouter(removed));
    }
    let guard = 4 * t.router_count() + 8 * (infinity_bound.units() / Cost::SCALE.max(1)) as usize + 16;
    let before = run_distance_vector(t, infinity_bound, guard).tables;
    let after_t = t.isolate_router(removed);
    let mut state: Vec<DetTable> = before
        .iter()
        .enumerate()
        .map(|(r, table)| {
            let mut table = table.clone();
            for e in table.entries.iter_mut() {
                *e = e.and_then(|e| {
                    remap_interfaces(t, &after_t, RouterId(r), e.interface).map(|i| DetEntry { interface: i, ..e })
                });
            }
            table
        })
        .collect();
    state[removed.0] = DetTable::empty(t.router_count());

    let reaches = |state: &[DetTable]| state.iter().any(|tb| tb.get(removed).is_some());
    let mut trace = CountTrace { removed, rows: Vec::new(), resolved: true };
    if !reaches(&state) {
        return Ok(trace);
    }
    for round in 1..=guard {
        state = dv_round(&state, &after_t, infinity_bound).0;
        let costs = state.iter().map(|tb| tb.get(removed).map_or(infinity_bound, |e| e.cost)).collect();
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
    use crate::topology::{generate, load_topology, GeneratorSpec};

    fn chain(n: usize) -> Topology {
        generate(&GeneratorSpec::LinearChain(n)).unwrap()
    }

    #[test]
    fn first_round_learns_neighbors_only() {
        let t = chain(4);
        let (r1, changed) = dv_round(&dv_cold_start(&t), &t, DEFAULT_INFINITY);
        assert!(changed);
        assert_eq!(r1[0].get(RouterId(1)).unwrap().cost, Cost::from_int(1));
        assert!(r1[0].get(RouterId(2)).is_none());
        assert!(r1[0].get(RouterId(3)).is_none());
    }

    #[test]
    fn chain_converges_in_diameter_rounds() {
        let t = chain(4);
        let run = run_distance_vector(&t, DEFAULT_INFINITY, 50);
        assert!(run.converged);
        assert_eq!(run.rounds_used, 3);
        assert_eq!(run.tables, run_link_state(&t).unwrap().tables);
        let (again, changed) = dv_round(&run.tables, &t, DEFAULT_INFINITY);
        assert!(!changed);
        assert_eq!(again, run.tables);
    }

    #[test]
    fn single_router_needs_no_rounds() {
        let t = chain(1);
        let run = run_distance_vector(&t, DEFAULT_INFINITY, 10);
        assert_eq!(run.rounds_used, 0);
        assert!(run.converged);
        assert!(run.tables[0].entries.iter().all(Option::is_none));
    }

    #[test]
    fn complete4_round_messages() {
        let t = generate(&GeneratorSpec::Complete(4)).unwrap();
        assert_eq!(dv_round_messages(&t), 36);
        let run = run_distance_vector(&t, DEFAULT_INFINITY, 10);
        assert!(run.per_round_messages.iter().all(|&m| m == 36));
    }

    #[test]
    fn non_convergence_is_reported() {
        let t = chain(6);
        let run = run_distance_vector(&t, DEFAULT_INFINITY, 2);
        assert!(!run.converged);
        assert_eq!(run.rounds_used, 2);
    }

    #[test]
    fn weighted_shortcut_takes_more_rounds_than_hop_diameter() {
        // Direct 0-1 link costs 9 but 0-2-1 costs 2: the best route has two
        // hops while the hop diameter is one.
        let t = load_topology("node 0\nnode 1\nnode 2\nlink 0:a 1:a 9 9\nlink 0:b 2:a 1 1\nlink 2:b 1:b 1 1\n").unwrap();
        assert_eq!(t.diameter().unwrap(), 1);
        let run = run_distance_vector(&t, DEFAULT_INFINITY, 10);
        assert_eq!(run.rounds_used, 2);
    }

    #[test]
    fn count_to_infinity_on_chain() {
        let t = chain(4);
        let trace = simulate_count_to_infinity(&t, RouterId(3), DEFAULT_INFINITY).unwrap();
        assert!(trace.resolved);
        // Hand-simulated synchronous rounds after D leaves (A, B, C):
        // r1: 3,4,3  r2: 5,4,5  r3: 5,6,5 ... until 16.
        let col = |k: usize| trace.rows.iter().map(|row| row.costs[k].units() / Cost::SCALE).collect::<Vec<_>>();
        assert_eq!(&col(0)[..3], &[3, 5, 5]);
        assert_eq!(&col(1)[..3], &[4, 4, 6]);
        assert_eq!(&col(2)[..3], &[3, 5, 5]);
        let last = trace.rows.last().unwrap();
        assert!(last.costs[..3].iter().all(|&c| c == DEFAULT_INFINITY));
        for k in [1, 2] {
            let mut vals = col(k);
            vals.dedup();
            assert!(vals.windows(2).all(|w| w[0] < w[1]), "router {k}: {vals:?}");
        }
    }

    #[test]
    fn removing_an_unreachable_router_gives_empty_trace() {
        let t = load_topology("node 0\nnode 1\nnode 2\nlink 0:a 1:a 1 1\n").unwrap();
        let trace = simulate_count_to_infinity(&t, RouterId(2), DEFAULT_INFINITY).unwrap();
        assert!(trace.rows.is_empty());
        assert!(simulate_count_to_infinity(&t, RouterId(7), DEFAULT_INFINITY).is_err());
    }
}
