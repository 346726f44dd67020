use std::collections::VecDeque;

use serde::Serialize;

use super::{InterfaceId, RouterId, Topology};
use crate::cost::Cost;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Hop {
    pub router: RouterId,
    pub interface: InterfaceId,
}

/// A simple (loop-free) directed path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Path {
    pub hops: Vec<Hop>,
    pub terminal: RouterId,
    pub total_cost: Cost,
}

impl Path {
    /// Routers visited, source first, terminal last.
    pub fn routers(&self) -> Vec<RouterId> {
        self.hops.iter().map(|h| h.router).chain(std::iter::once(self.terminal)).collect()
    }

    /// Re-walks the path over `t`, checking links exist, no router repeats,
    /// and the recorded cost matches.
    pub fn replay(&self, t: &Topology) -> bool {
        let routers = self.routers();
        let mut seen = vec![false; t.router_count()];
        for r in &routers {
            if std::mem::replace(&mut seen[r.0], true) {
                return false;
            }
        }
        let mut cost = Cost::ZERO;
        for (k, hop) in self.hops.iter().enumerate() {
            let Some(port) = t.ports(hop.router).get(hop.interface) else { return false };
            if port.neighbor != routers[k + 1] {
                return false;
            }
            cost += port.cost_out;
        }
        cost == self.total_cost
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathEnumeration {
    pub paths: Vec<Path>,
    /// Set when `max_paths` stopped the search early.
    pub truncated: bool,
}

/// Every simple path `src -> dst`, by depth-first search in interface order,
/// which yields paths sorted lexicographically by hop sequence.
///
/// `src == dst` yields the single zero-hop path.
pub fn enumerate_loop_free_paths(
    t: &Topology,
    src: RouterId,
    dst: RouterId,
    max_paths: Option<usize>,
) -> PathEnumeration {
    let mut out = PathEnumeration { paths: Vec::new(), truncated: false };
    if src == dst {
        out.paths.push(Path { hops: Vec::new(), terminal: dst, total_cost: Cost::ZERO });
        return out;
    }
    let mut on_path = vec![false; t.router_count()];
    let mut hops = Vec::new();
    on_path[src.0] = true;
    dfs(t, src, dst, Cost::ZERO, &mut on_path, &mut hops, max_paths, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    t: &Topology,
    at: RouterId,
    dst: RouterId,
    cost: Cost,
    on_path: &mut [bool],
    hops: &mut Vec<Hop>,
    max_paths: Option<usize>,
    out: &mut PathEnumeration,
) {
    for (i, port) in t.ports(at).iter().enumerate() {
        if out.truncated {
            return;
        }
        let next = port.neighbor;
        if on_path[next.0] {
            continue;
        }
        hops.push(Hop { router: at, interface: i });
        let c = cost + port.cost_out;
        if next == dst {
            if max_paths.is_some_and(|m| out.paths.len() >= m) {
                out.truncated = true;
            } else {
                out.paths.push(Path { hops: hops.clone(), terminal: dst, total_cost: c });
            }
        } else {
            on_path[next.0] = true;
            dfs(t, next, dst, c, on_path, hops, max_paths, out);
            on_path[next.0] = false;
        }
        hops.pop();
    }
}

/// Interfaces of `r` that start at least one loop-free path to `d`.
///
/// Interface `i` towards neighbor `y` qualifies exactly when `y == d` or `d`
/// is reachable from `y` without passing through `r`; any such walk can be
/// shortened to a simple path.
pub fn loop_free_first_hops(t: &Topology, r: RouterId, d: RouterId) -> Vec<InterfaceId> {
    if r == d {
        return Vec::new();
    }
    let mut reach = vec![false; t.router_count()];
    reach[d.0] = true;
    let mut queue = VecDeque::from([d]);
    // Links are bidirectional, so reachability to d equals reachability from d.
    while let Some(u) = queue.pop_front() {
        for p in t.ports(u) {
            let v = p.neighbor;
            if v != r && !reach[v.0] {
                reach[v.0] = true;
                queue.push_back(v);
            }
        }
    }
    t.ports(r)
        .iter()
        .enumerate()
        .filter(|(_, p)| reach[p.neighbor.0])
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate, GeneratorSpec};
    use std::collections::BTreeSet;

    fn gen(s: &str) -> Topology {
        generate(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn complete3_has_two_paths() {
        let t = gen("complete:3");
        let e = enumerate_loop_free_paths(&t, RouterId(0), RouterId(1), None);
        let routes: Vec<Vec<usize>> = e.paths.iter().map(|p| p.routers().iter().map(|r| r.0).collect()).collect();
        assert_eq!(routes, vec![vec![0, 1], vec![0, 2, 1]]);
        assert!(!e.truncated);
    }

    #[test]
    fn chain_has_unique_path() {
        let t = gen("linear_chain:4");
        let e = enumerate_loop_free_paths(&t, RouterId(0), RouterId(3), None);
        assert_eq!(e.paths.len(), 1);
        assert_eq!(e.paths[0].total_cost, Cost::from_int(3));
    }

    #[test]
    fn disconnected_pair_has_no_paths() {
        let mut b = Topology::builder();
        b.routers([0, 1]).unwrap();
        let t = b.build().unwrap();
        assert!(enumerate_loop_free_paths(&t, RouterId(0), RouterId(1), None).paths.is_empty());
    }

    #[test]
    fn truncation_is_flagged() {
        let t = gen("complete:5");
        let e = enumerate_loop_free_paths(&t, RouterId(0), RouterId(1), Some(3));
        assert_eq!(e.paths.len(), 3);
        assert!(e.truncated);
        let e = enumerate_loop_free_paths(&t, RouterId(0), RouterId(1), Some(16));
        assert_eq!(e.paths.len(), 16);
        assert!(!e.truncated);
    }

    #[test]
    fn complete_graph_counts_match_formula() {
        for n in 2..=6usize {
            let t = gen(&format!("complete:{n}"));
            let m = n - 2;
            let fact = |k: usize| (1..=k).product::<usize>();
            let expected: usize = (0..=m).map(|k| fact(m) / fact(m - k)).sum();
            let e = enumerate_loop_free_paths(&t, RouterId(0), RouterId(1), None);
            assert_eq!(e.paths.len(), expected, "n={n}");
        }
    }

    #[test]
    fn paths_are_unique_replayable_and_sorted() {
        for seed in 0..20 {
            let t = generate(&GeneratorSpec::RandomConnected {
                n: 7,
                edge_prob: 0.4,
                cost_min: 1,
                cost_max: 5,
                seed,
            })
            .unwrap();
            let e = enumerate_loop_free_paths(&t, RouterId(0), RouterId(6), None);
            let keys: Vec<Vec<Hop>> = e.paths.iter().map(|p| p.hops.clone()).collect();
            let mut sorted = keys.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(keys, sorted);
            assert!(e.paths.iter().all(|p| p.replay(&t)));
        }
    }

    #[test]
    fn first_hops_agree_with_enumeration() {
        for seed in 0..30 {
            let t = generate(&GeneratorSpec::RandomConnected {
                n: 6,
                edge_prob: 0.35,
                cost_min: 1,
                cost_max: 3,
                seed,
            })
            .unwrap();
            for r in t.routers() {
                for d in t.routers() {
                    let from_enum: BTreeSet<_> = enumerate_loop_free_paths(&t, r, d, None)
                        .paths
                        .iter()
                        .filter_map(|p| p.hops.first().map(|h| h.interface))
                        .collect();
                    let direct: BTreeSet<_> = loop_free_first_hops(&t, r, d).into_iter().collect();
                    assert_eq!(from_enum, direct);
                }
            }
        }
    }
}
