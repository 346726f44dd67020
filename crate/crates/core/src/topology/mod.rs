//! Router graph: construction, the text file format, parametric generators
//! and loop-free path queries.
//!
//! Routers are addressed internally by a dense [`RouterId`] (declaration
//! order). The integer written in a topology file is kept as the router's
//! *label* and is what every textual output prints.

mod generate;
mod parse;
mod paths;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::Cost;

pub use generate::{generate, GeneratorSpec};
pub use parse::{emit_topology, load_topology};
pub use paths::{enumerate_loop_free_paths, loop_free_first_hops, Hop, Path, PathEnumeration};

/// Dense router index, `0..topology.router_count()`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RouterId(pub usize);

impl RouterId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for RouterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Position of an interface in its owning router's interface list.
pub type InterfaceId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: self-loop link on router {label}")]
    SelfLoop { line: usize, label: u32 },
    #[error("line {line}: negative cost")]
    NegativeCost { line: usize },
    #[error("router {label}: duplicate interface `{name}`")]
    DuplicateInterface { label: u32, name: String },
    #[error("duplicate router {0}")]
    DuplicateRouter(u32),
    #[error("unknown router {0}")]
    UnknownRouter(u32),
    #[error("topology has no routers")]
    Empty,
    #[error("topology is disconnected")]
    Disconnected,
    #[error("invalid generator parameters: {0}")]
    InvalidParameter(String),
}

/// One bidirectional link: a pair of directed edges with independent costs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub a: RouterId,
    pub a_interface: String,
    pub b: RouterId,
    pub b_interface: String,
    /// Cost of the `a -> b` direction.
    pub cost_ab: Cost,
    /// Cost of the `b -> a` direction.
    pub cost_ba: Cost,
}

/// A router's view of one of its interfaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub neighbor: RouterId,
    pub link: usize,
    /// Cost of sending out of this interface.
    pub cost_out: Cost,
    /// Cost of the reverse direction (neighbor back to this router).
    pub cost_in: Cost,
    /// Index of the matching interface at the neighbor.
    pub peer: InterfaceId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    labels: Vec<u32>,
    links: Vec<Link>,
    ports: Vec<Vec<Port>>,
}

impl Topology {
    pub fn builder() -> TopologyBuilder {
        TopologyBuilder::default()
    }

    pub fn router_count(&self) -> usize {
        self.labels.len()
    }

    pub fn routers(&self) -> impl Iterator<Item = RouterId> + '_ {
        (0..self.labels.len()).map(RouterId)
    }

    pub fn label(&self, r: RouterId) -> u32 {
        self.labels[r.0]
    }

    pub fn router_by_label(&self, label: u32) -> Option<RouterId> {
        self.labels.iter().position(|&l| l == label).map(RouterId)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn ports(&self, r: RouterId) -> &[Port] {
        &self.ports[r.0]
    }

    pub fn port(&self, r: RouterId, i: InterfaceId) -> &Port {
        &self.ports[r.0][i]
    }

    pub fn degree(&self, r: RouterId) -> usize {
        self.ports[r.0].len()
    }

    pub fn interface_by_name(&self, r: RouterId, name: &str) -> Option<InterfaceId> {
        self.ports[r.0].iter().position(|p| p.name == name)
    }

    /// Interfaces of `from` that lead directly to `to`, in interface order.
    pub fn interfaces_to(&self, from: RouterId, to: RouterId) -> impl Iterator<Item = InterfaceId> + '_ {
        self.ports[from.0]
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.neighbor == to)
            .map(|(i, _)| i)
    }

    /// Replaces both direction costs of one link.
    pub fn set_link_costs(&mut self, link: usize, cost_ab: Cost, cost_ba: Cost) {
        let l = &mut self.links[link];
        l.cost_ab = cost_ab;
        l.cost_ba = cost_ba;
        self.rebuild_ports();
    }

    /// Copy of this topology with every link touching `r` removed. The router
    /// itself stays (isolated) so router indices remain stable.
    pub fn isolate_router(&self, r: RouterId) -> Topology {
        let mut t = Topology {
            labels: self.labels.clone(),
            links: self.links.iter().filter(|l| l.a != r && l.b != r).cloned().collect(),
            ports: Vec::new(),
        };
        t.rebuild_ports();
        t
    }

    fn rebuild_ports(&mut self) {
        let mut ports: Vec<Vec<Port>> = vec![Vec::new(); self.labels.len()];
        for (idx, l) in self.links.iter().enumerate() {
            let pa = ports[l.a.0].len();
            let pb = ports[l.b.0].len();
            ports[l.a.0].push(Port {
                name: l.a_interface.clone(),
                neighbor: l.b,
                link: idx,
                cost_out: l.cost_ab,
                cost_in: l.cost_ba,
                peer: pb,
            });
            ports[l.b.0].push(Port {
                name: l.b_interface.clone(),
                neighbor: l.a,
                link: idx,
                cost_out: l.cost_ba,
                cost_in: l.cost_ab,
                peer: pa,
            });
        }
        self.ports = ports;
    }

    /// Minimum hop counts from `src`; `None` for unreachable routers.
    pub fn hop_distances(&self, src: RouterId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.router_count()];
        dist[src.0] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.0].unwrap();
            for p in self.ports(u) {
                if dist[p.neighbor.0].is_none() {
                    dist[p.neighbor.0] = Some(du + 1);
                    queue.push_back(p.neighbor);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.hop_distances(RouterId(0)).iter().all(Option::is_some)
    }

    /// Largest minimum hop count over all ordered router pairs.
    pub fn diameter(&self) -> Result<usize, TopologyError> {
        let mut best = 0;
        for r in self.routers() {
            for d in self.hop_distances(r) {
                best = best.max(d.ok_or(TopologyError::Disconnected)?);
            }
        }
        Ok(best)
    }
}

#[derive(Default, Debug)]
pub struct TopologyBuilder {
    labels: Vec<u32>,
    index: HashMap<u32, RouterId>,
    links: Vec<Link>,
    interfaces: HashSet<(usize, String)>,
}

impl TopologyBuilder {
    pub fn router(&mut self, label: u32) -> Result<RouterId, TopologyError> {
        if self.index.contains_key(&label) {
            return Err(TopologyError::DuplicateRouter(label));
        }
        let id = RouterId(self.labels.len());
        self.labels.push(label);
        self.index.insert(label, id);
        Ok(id)
    }

    pub fn routers(&mut self, labels: impl IntoIterator<Item = u32>) -> Result<(), TopologyError> {
        labels.into_iter().try_for_each(|l| self.router(l).map(|_| ()))
    }

    pub fn link(
        &mut self,
        a: u32,
        a_interface: &str,
        b: u32,
        b_interface: &str,
        cost_ab: Cost,
        cost_ba: Cost,
    ) -> Result<&mut Self, TopologyError> {
        if a == b {
            return Err(TopologyError::SelfLoop { line: 0, label: a });
        }
        let ra = *self.index.get(&a).ok_or(TopologyError::UnknownRouter(a))?;
        let rb = *self.index.get(&b).ok_or(TopologyError::UnknownRouter(b))?;
        for (r, label, name) in [(ra, a, a_interface), (rb, b, b_interface)] {
            if !self.interfaces.insert((r.0, name.to_string())) {
                return Err(TopologyError::DuplicateInterface { label, name: name.to_string() });
            }
        }
        self.links.push(Link {
            a: ra,
            a_interface: a_interface.to_string(),
            b: rb,
            b_interface: b_interface.to_string(),
            cost_ab,
            cost_ba,
        });
        Ok(self)
    }

    /// Adds a link with generated interface names `i<k>` (next free index at
    /// each end) and symmetric cost.
    pub fn auto_link(&mut self, a: u32, b: u32, cost: Cost) -> Result<&mut Self, TopologyError> {
        let next = |me: &Self, label: u32| -> String {
            let r = me.index.get(&label).map(|r| r.0).unwrap_or(usize::MAX);
            let mut k = 1;
            while me.interfaces.contains(&(r, format!("i{k}"))) {
                k += 1;
            }
            format!("i{k}")
        };
        let ia = next(self, a);
        let ib = next(self, b);
        self.link(a, &ia, b, &ib, cost, cost)
    }

    pub fn build(&self) -> Result<Topology, TopologyError> {
        if self.labels.is_empty() {
            return Err(TopologyError::Empty);
        }
        let mut t = Topology { labels: self.labels.clone(), links: self.links.clone(), ports: Vec::new() };
        t.rebuild_ports();
        Ok(t)
    }
}
