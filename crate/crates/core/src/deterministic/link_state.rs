use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use serde::Serialize;

use super::DeterministicError;
use crate::cost::Cost;
use crate::tables::{DetEntry, DetTable};
use crate::topology::{RouterId, Topology};

#[derive(Clone, Debug, Serialize)]
pub struct LinkStateRun {
    pub tables: Vec<DetTable>,
    /// Link-state advertisements originated (one per router).
    pub message_count: usize,
    /// Link crossings summed over all flooded advertisements.
    pub flood_link_traversals: usize,
    /// Advertisement entries carried over links: each crossing carries one
    /// entry per neighbor of the originator.
    pub payload_units: usize,
}

/// Floods every router's advertisement, then computes each router's
/// shortest-path next hops over the complete map.
pub fn run_link_state(t: &Topology) -> Result<LinkStateRun, DeterministicError> {
    if !t.is_connected() {
        return Err(DeterministicError::Disconnected);
    }
    let mut flood_link_traversals = 0;
    let mut payload_units = 0;
    for origin in t.routers() {
        let crossings = flood(t, origin);
        flood_link_traversals += crossings;
        payload_units += crossings * t.degree(origin);
    }
    let everyone = vec![true; t.router_count()];
    let to_dest: Vec<Vec<Option<Cost>>> = t.routers().map(|d| costs_to(t, d, &everyone)).collect();
    let tables = t.routers().map(|x| table_from_costs(t, x, &to_dest)).collect();
    Ok(LinkStateRun { tables, message_count: t.router_count(), flood_link_traversals, payload_units })
}

/// Pruned flooding: a router forwards a fresh advertisement on every link
/// the advertisement has not crossed yet. Returns the number of crossings.
fn flood(t: &Topology, origin: RouterId) -> usize {
    let mut crossed = vec![false; t.link_count()];
    let mut has = vec![false; t.router_count()];
    has[origin.0] = true;
    let mut queue = VecDeque::from([origin]);
    let mut crossings = 0;
    while let Some(u) = queue.pop_front() {
        for p in t.ports(u) {
            if crossed[p.link] {
                continue;
            }
            crossed[p.link] = true;
            crossings += 1;
            if !has[p.neighbor.0] {
                has[p.neighbor.0] = true;
                queue.push_back(p.neighbor);
            }
        }
    }
    crossings
}

/// Tables computed when each router only holds the advertisements of routers
/// within `horizon` hops, i.e. after `horizon` flooding steps.
pub fn link_state_partial(t: &Topology, horizon: usize) -> Vec<DetTable> {
    t.routers()
        .map(|x| {
            let known: Vec<bool> = t.hop_distances(x).iter().map(|h| h.is_some_and(|h| h <= horizon)).collect();
            let to_dest: Vec<Vec<Option<Cost>>> = t.routers().map(|d| costs_to(t, d, &known)).collect();
            table_from_costs(t, x, &to_dest)
        })
        .collect()
}

/// Shortest costs from every router to `dest`, using only the outgoing links
/// of routers flagged in `known` (reverse Dijkstra).
fn costs_to(t: &Topology, dest: RouterId, known: &[bool]) -> Vec<Option<Cost>> {
    let mut dist: Vec<Option<Cost>> = vec![None; t.router_count()];
    let mut heap = BinaryHeap::from([Reverse((Cost::ZERO, dest))]);
    dist[dest.0] = Some(Cost::ZERO);
    while let Some(Reverse((dv, v))) = heap.pop() {
        if dist[v.0].is_some_and(|d| d < dv) {
            continue;
        }
        for q in t.ports(v) {
            let u = q.neighbor;
            if !known[u.0] {
                continue;
            }
            // q.cost_in is the u -> v direction.
            let cand = dv + q.cost_in;
            if dist[u.0].is_none_or(|du| cand < du) {
                dist[u.0] = Some(cand);
                heap.push(Reverse((cand, u)));
            }
        }
    }
    dist
}

/// Next hop per destination: among interfaces on some shortest path, the one
/// with the lowest neighbor id, then lowest interface index.
fn table_from_costs(t: &Topology, x: RouterId, to_dest: &[Vec<Option<Cost>>]) -> DetTable {
    let mut table = DetTable::empty(t.router_count());
    for d in t.routers() {
        if d == x {
            continue;
        }
        let Some(best) = to_dest[d.0][x.0] else { continue };
        table.entries[d.0] = t
            .ports(x)
            .iter()
            .enumerate()
            .filter(|(_, p)| to_dest[d.0][p.neighbor.0].is_some_and(|rest| p.cost_out + rest == best))
            .min_by_key(|(i, p)| (p.neighbor, *i))
            .map(|(i, _)| DetEntry { interface: i, cost: best });
    }
    table
}

/// Single-source shortest costs from `src` (Dijkstra over forward costs).
pub fn shortest_costs_from(t: &Topology, src: RouterId) -> Vec<Option<Cost>> {
    let mut dist: Vec<Option<Cost>> = vec![None; t.router_count()];
    let mut heap = BinaryHeap::from([Reverse((Cost::ZERO, src))]);
    dist[src.0] = Some(Cost::ZERO);
    while let Some(Reverse((du, u))) = heap.pop() {
        if dist[u.0].is_some_and(|d| d < du) {
            continue;
        }
        for p in t.ports(u) {
            let cand = du + p.cost_out;
            if dist[p.neighbor.0].is_none_or(|dv| cand < dv) {
                dist[p.neighbor.0] = Some(cand);
                heap.push(Reverse((cand, p.neighbor)));
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate, load_topology, GeneratorSpec};

    #[test]
    fn chain_routes_through_neighbor() {
        let t = generate(&GeneratorSpec::LinearChain(4)).unwrap();
        let run = run_link_state(&t).unwrap();
        let e = run.tables[0].get(RouterId(3)).unwrap();
        assert_eq!(e.cost, Cost::from_int(3));
        assert_eq!(t.port(RouterId(0), e.interface).neighbor, RouterId(1));
    }

    #[test]
    fn complete2_single_entries() {
        let t = generate(&GeneratorSpec::Complete(2)).unwrap();
        let run = run_link_state(&t).unwrap();
        for (r, d) in [(0, 1), (1, 0)] {
            assert_eq!(run.tables[r].get(RouterId(d)).unwrap().cost, Cost::from_int(1));
            assert!(run.tables[r].get(RouterId(r)).is_none());
        }
    }

    #[test]
    fn ties_go_to_lowest_neighbor() {
        // 0 reaches 3 through 1 or 2 at equal cost; 2 is declared first on 0.
        let t = load_topology(
            "node 0\nnode 1\nnode 2\nnode 3\nlink 0:a 2:a 1 1\nlink 0:b 1:a 1 1\nlink 1:b 3:a 1 1\nlink 2:b 3:b 1 1\n",
        )
        .unwrap();
        let run = run_link_state(&t).unwrap();
        let e = run.tables[0].get(RouterId(3)).unwrap();
        assert_eq!(t.port(RouterId(0), e.interface).neighbor, RouterId(1));
    }

    #[test]
    fn asymmetric_costs_use_forward_direction() {
        let t = load_topology("node 0\nnode 1\nnode 2\nlink 0:a 1:a 1 5\nlink 1:b 2:a 1 1\nlink 0:b 2:b 9 1\n").unwrap();
        let run = run_link_state(&t).unwrap();
        assert_eq!(run.tables[0].get(RouterId(1)).unwrap().cost, Cost::from_int(1));
        assert_eq!(run.tables[1].get(RouterId(0)).unwrap().cost, Cost::from_int(2));
        assert_eq!(shortest_costs_from(&t, RouterId(1))[0], Some(Cost::from_int(2)));
    }

    #[test]
    fn flooding_crosses_each_link_once_per_advertisement() {
        let t = generate(&GeneratorSpec::Complete(4)).unwrap();
        let run = run_link_state(&t).unwrap();
        assert_eq!(run.message_count, 4);
        assert_eq!(run.flood_link_traversals, 4 * 6);
        assert_eq!(run.payload_units, 4 * 6 * 3);
    }

    #[test]
    fn disconnected_is_an_error() {
        let t = load_topology("node 0\nnode 1").unwrap();
        assert!(matches!(run_link_state(&t), Err(DeterministicError::Disconnected)));
    }

    #[test]
    fn partial_horizon_grows_to_full_tables() {
        let t = generate(&GeneratorSpec::LinearChain(4)).unwrap();
        let h0 = link_state_partial(&t, 0);
        assert!(h0[0].get(RouterId(1)).is_some());
        assert!(h0[0].get(RouterId(2)).is_none());
        let full = run_link_state(&t).unwrap().tables;
        assert_eq!(link_state_partial(&t, 3), full);
    }
}
