//! Constructive deterministic baselines run in synchronous rounds:
//! link-state flooding plus Dijkstra, distance-vector (distributed
//! Bellman-Ford with an infinity bound and no split horizon), and
//! path-vector with loop filtering.

mod distance_vector;
mod link_state;
mod path_vector;

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::cost::Cost;
use crate::tables::DetTable;
use crate::topology::{InterfaceId, RouterId, Topology};

pub use distance_vector::{
    dv_cold_start, dv_round, dv_round_messages, run_distance_vector, simulate_count_to_infinity, DvRun,
    DEFAULT_INFINITY,
};
pub use link_state::{link_state_partial, run_link_state, shortest_costs_from, LinkStateRun};
pub use path_vector::{pv_round, run_path_vector, simulate_path_vector_withdrawal, PvRun};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeterministicError {
    #[error("topology is disconnected")]
    Disconnected,
    #[error("router {0} is not in the topology")]
    UnknownRouter(RouterId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountTraceRow {
    pub round: usize,
    /// Cost of every router to the removed router, indexed by router.
    pub costs: Vec<Cost>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountTrace {
    pub removed: RouterId,
    pub rows: Vec<CountTraceRow>,
    /// False if the round guard ran out before every route disappeared.
    pub resolved: bool,
}

impl CountTrace {
    /// Cost column of one router across the trace.
    pub fn costs_of(&self, r: RouterId) -> Vec<Cost> {
        self.rows.iter().map(|row| row.costs[r.0]).collect()
    }
}

/// Maps an interface index of `r` in `before` to its index in `after` (a
/// topology with some links removed), by interface name.
fn remap_interfaces(before: &Topology, after: &Topology, r: RouterId, i: InterfaceId) -> Option<InterfaceId> {
    after.interface_by_name(r, &before.port(r, i).name)
}

/// `round,router,destination,cost,next_hop` rows for a sequence of table
/// snapshots (`history[k]` is the state after round `k`). Unreachable
/// entries are omitted; routers print by label.
pub fn round_trace_csv(t: &Topology, history: &[Vec<DetTable>]) -> String {
    let mut out = String::from("round,router,destination,cost,next_hop\n");
    for (round, tables) in history.iter().enumerate() {
        for x in t.routers() {
            for d in t.routers() {
                if let Some(e) = tables[x.0].get(d) {
                    let hop = t.port(x, e.interface).neighbor;
                    writeln!(out, "{round},{},{},{},{}", t.label(x), t.label(d), e.cost, t.label(hop)).unwrap();
                }
            }
        }
    }
    out
}
