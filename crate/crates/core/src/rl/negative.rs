use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Ant, RlError};
use crate::tables::{ProbRow, ProbTables};
use crate::topology::{InterfaceId, RouterId, Topology};

/// How much context qualifies a negative-reinforcement row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegQualifier {
    DestinationOnly,
    SourceDestination,
    SourceDestinationIncomingLink,
}

impl NegQualifier {
    pub const ALL: [NegQualifier; 3] =
        [NegQualifier::DestinationOnly, NegQualifier::SourceDestination, NegQualifier::SourceDestinationIncomingLink];
}

impl FromStr for NegQualifier {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "destination_only" => Ok(NegQualifier::DestinationOnly),
            "source_destination" => Ok(NegQualifier::SourceDestination),
            "source_destination_incoming_link" => Ok(NegQualifier::SourceDestinationIncomingLink),
            _ => Err(format!("unknown negative-reinforcement level `{s}`")),
        }
    }
}

/// "`destination` is not reachable from `router` via `interface`", as seen
/// by traffic from `source` that entered `router` on `arrival`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NegSignal {
    pub router: RouterId,
    pub interface: InterfaceId,
    pub source: RouterId,
    pub destination: RouterId,
    /// `None` when `router` is the source itself.
    pub arrival: Option<InterfaceId>,
}

type MaskKey = (RouterId, Option<RouterId>, RouterId, Option<Option<InterfaceId>>);

/// Interfaces zeroed by accepted signals, layered over a base probability
/// table. Rows are keyed as coarsely as the qualifier level allows.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NegMasks {
    level: Option<NegQualifier>,
    masks: BTreeMap<MaskKey, Vec<InterfaceId>>,
    /// Signals refused because they would have emptied a row.
    pub rejected: usize,
}

impl NegMasks {
    pub fn new(level: NegQualifier) -> NegMasks {
        NegMasks { level: Some(level), masks: BTreeMap::new(), rejected: 0 }
    }

    pub fn level(&self) -> Option<NegQualifier> {
        self.level
    }

    fn key(&self, router: RouterId, source: RouterId, destination: RouterId, arrival: Option<InterfaceId>) -> MaskKey {
        match self.level {
            None | Some(NegQualifier::DestinationOnly) => (router, None, destination, None),
            Some(NegQualifier::SourceDestination) => (router, Some(source), destination, None),
            Some(NegQualifier::SourceDestinationIncomingLink) => (router, Some(source), destination, Some(arrival)),
        }
    }

    /// Number of (row, interface) pairs currently zeroed.
    pub fn zeroed(&self) -> usize {
        self.masks.values().map(Vec::len).sum()
    }

    /// Row actually used to forward a packet from `source` that entered
    /// `router` on `arrival`: the base row with masked interfaces removed
    /// and the rest renormalized.
    pub fn effective_row(
        &self,
        base: &ProbTables,
        router: RouterId,
        source: RouterId,
        destination: RouterId,
        arrival: Option<InterfaceId>,
    ) -> Option<ProbRow> {
        let row = base.row(router, destination)?;
        let Some(mask) = self.masks.get(&self.key(router, source, destination, arrival)) else {
            return Some(row.clone());
        };
        masked(row, mask).ok()
    }
}

fn masked(row: &ProbRow, mask: &[InterfaceId]) -> Result<ProbRow, RlError> {
    let mut v = row.as_slice().to_vec();
    for &i in mask {
        v[i] = 0.0;
    }
    Ok(ProbRow::from_weights(v)?)
}

/// Records `signal` in `masks`, zeroing the signalled interface in the
/// qualified row. Returns the row now in force.
///
/// A signal that would leave the row with no probability mass is rejected
/// and counted; the row stays as it was.
pub fn negative_reinforce(
    masks: &mut NegMasks,
    base: &ProbTables,
    signal: &NegSignal,
) -> Result<ProbRow, RlError> {
    let row = base
        .row(signal.router, signal.destination)
        .ok_or(RlError::MalformedStack("signal names a router's own row"))?;
    if signal.interface >= row.len() {
        return Err(RlError::InterfaceOutOfRange { index: signal.interface, len: row.len() });
    }
    let key = masks.key(signal.router, signal.source, signal.destination, signal.arrival);
    let mut mask = masks.masks.get(&key).cloned().unwrap_or_default();
    if !mask.contains(&signal.interface) {
        mask.push(signal.interface);
        mask.sort_unstable();
    }
    match masked(row, &mask) {
        Ok(new_row) => {
            masks.masks.insert(key, mask);
            Ok(new_row)
        }
        Err(_) => {
            masks.rejected += 1;
            Err(RlError::AllZeroRow { router: signal.router })
        }
    }
}

/// Signal raised when an ant carrying a stack arrives at `at`: either `at`
/// is a dead end that is not the destination, or the ant has been at `at`
/// before. The signal goes to the previous hop about the interface it used.
pub fn detect_signal(t: &Topology, ant: &Ant, at: RouterId) -> Option<NegSignal> {
    let stack = ant.stack.as_deref()?;
    let prev = stack.last()?;
    let dead_end = at != ant.destination && t.degree(at) <= 1;
    let revisit = stack.iter().any(|e| e.router == at);
    (dead_end || revisit).then_some(NegSignal {
        router: prev.router,
        interface: prev.chosen,
        source: ant.source,
        destination: ant.destination,
        arrival: prev.arrived_on,
    })
}

/// True when acting on `signal` at `level` would cut a loop-free path the
/// qualified row is responsible for, i.e. some simple path consistent with
/// the qualifier leaves `signal.router` on `signal.interface` and reaches
/// the destination.
pub fn is_false_negative(t: &Topology, level: NegQualifier, signal: &NegSignal) -> bool {
    let r = signal.router;
    let n = t.router_count();
    let mut on_path = vec![false; n];
    if level != NegQualifier::DestinationOnly && signal.source == r {
        let consistent = level == NegQualifier::SourceDestination || signal.arrival.is_none();
        return consistent && suffix_exists(t, r, signal.interface, signal.destination, &mut on_path);
    }
    match level {
        NegQualifier::DestinationOnly => suffix_exists(t, r, signal.interface, signal.destination, &mut on_path),
        NegQualifier::SourceDestination | NegQualifier::SourceDestinationIncomingLink => {
            let arrival = (level == NegQualifier::SourceDestinationIncomingLink).then_some(signal.arrival);
            prefix_then_suffix(t, signal.source, signal, arrival, &mut on_path)
        }
    }
}

/// Simple path `r --i--> ... -> d` avoiding routers already on the path.
fn suffix_exists(t: &Topology, r: RouterId, i: InterfaceId, d: RouterId, on_path: &mut [bool]) -> bool {
    on_path[r.0] = true;
    let y = t.port(r, i).neighbor;
    let found = !on_path[y.0] && (y == d || reaches_avoiding(t, y, d, on_path));
    on_path[r.0] = false;
    found
}

fn reaches_avoiding(t: &Topology, from: RouterId, d: RouterId, blocked: &[bool]) -> bool {
    let mut seen = blocked.to_vec();
    let mut stack = vec![from];
    seen[from.0] = true;
    while let Some(u) = stack.pop() {
        if u == d {
            return true;
        }
        for p in t.ports(u) {
            if !seen[p.neighbor.0] {
                seen[p.neighbor.0] = true;
                stack.push(p.neighbor);
            }
        }
    }
    false
}

/// DFS over simple prefixes `source -> ... -> r`, checking each for a
/// disjoint suffix. `arrival = Some(a)` restricts the prefix's last link to
/// enter `r` on interface `a` (`a == None` meaning `r` is the source).
fn prefix_then_suffix(
    t: &Topology,
    at: RouterId,
    signal: &NegSignal,
    arrival: Option<Option<InterfaceId>>,
    on_path: &mut [bool],
) -> bool {
    let r = signal.router;
    if at == r {
        return false;
    }
    on_path[at.0] = true;
    let mut found = false;
    for p in t.ports(at) {
        let y = p.neighbor;
        if on_path[y.0] || y == signal.destination {
            continue;
        }
        if y == r {
            if arrival.is_none_or(|a| a == Some(p.peer))
                && suffix_exists(t, r, signal.interface, signal.destination, on_path)
            {
                found = true;
            }
        } else {
            found = prefix_then_suffix(t, y, signal, arrival, on_path);
        }
        if found {
            break;
        }
    }
    on_path[at.0] = false;
    found
}
