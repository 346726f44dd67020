//! Seeded discrete-event engine.
//!
//! One [`Engine`] runs one scenario on a single thread. Events are ordered by
//! (time, insertion sequence), so a run is a pure function of its config and
//! seed; every processed event is folded into a SHA-256 log hash that two
//! runs can compare.
//!
//! Each outgoing interface is a FIFO: a transmission starts when the link is
//! free and occupies it for the link delay. Data packets and ants are
//! separate event streams. Under the ant protocols only ants touch the
//! tables; under Q-routing every data hop updates an estimate.

mod config;
#[cfg(test)]
mod tests;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cost::Cost;
use crate::deterministic::{
    dv_cold_start, dv_round, dv_round_messages, link_state_partial, pv_round, run_link_state,
};
use crate::metrics::{
    convergence_time, loop_statistics, percentiles, reachability_coverage, split_ratio, uses_hop, MessageCounters,
    MetricsError, MetricsReport, PacketCounters,
};
use crate::rl::{
    detect_signal, negative_reinforce, process_backward_ant, process_forward_ant, q_forward_row, q_update, Ant,
    AntAction, AntLearning, AntMode, BackwardOutcome, CostFunction, NegMasks, QVariant, ReinforcementUpdate, RlError,
};
use crate::tables::{choose_interface, det_as_prob, DetTable, ForwardPolicy, PathVectorTable, ProbTables, QTable, TableError};
use crate::topology::{generate, load_topology, InterfaceId, RouterId, Topology, TopologyError};

pub use config::{
    AntConfig, ChangeKind, ConfigError, DataConfig, DelayModel, Destinations, MetricsConfig, ProtocolKind, QConfig,
    ScenarioConfig, TopologyChange, TopologySource,
};

/// Simulated time in microseconds (1/1000 ms), the same scale as [`Cost`]
/// units so a cost read as milliseconds converts exactly.
pub type SimTime = u64;

pub const TICKS_PER_MS: u64 = Cost::SCALE;

pub fn ms_to_ticks(ms: f64) -> SimTime {
    (ms * TICKS_PER_MS as f64).round() as SimTime
}

pub fn ticks_to_ms(t: SimTime) -> f64 {
    t as f64 / TICKS_PER_MS as f64
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("topology is disconnected")]
    Disconnected,
    #[error("no router labelled {0}")]
    UnknownLabel(u32),
    #[error("no link between routers {0} and {1}")]
    UnknownLink(u32, u32),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl SimError {
    /// Whether the failure lies in the scenario description rather than in
    /// running it.
    pub fn is_config_error(&self) -> bool {
        matches!(self, SimError::Config(_) | SimError::Topology(_) | SimError::UnknownLabel(_) | SimError::UnknownLink(..))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Packet {
    pub id: u64,
    pub source: RouterId,
    pub destination: RouterId,
    pub hop_budget: u32,
    /// Routers visited so far, source first.
    pub trace: Vec<RouterId>,
    pub created_at: SimTime,
    pub delivered_at: Option<SimTime>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum EventKind {
    PacketArrival { packet: Packet, router: RouterId, arrival: Option<InterfaceId> },
    AntArrival { ant: Ant, router: RouterId, arrival: Option<InterfaceId> },
    AntGeneration { router: RouterId },
    DataGeneration { pair: usize },
    RoundTick,
    TopologyChange { index: usize },
    Snapshot,
    ScenarioEnd,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub time: SimTime,
    pub seq: u64,
    pub kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    // Reversed so the max-heap pops the earliest (time, seq) first.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Event {
    fn log_line(&self) -> String {
        let body = match &self.kind {
            EventKind::PacketArrival { packet, router, arrival } => {
                format!("pkt {} {} {:?} hops={}", packet.id, router, arrival, packet.trace.len())
            }
            EventKind::AntArrival { ant, router, arrival } => format!(
                "ant {}>{} {:?} at={} {:?} c={} b={}",
                ant.source, ant.destination, ant.mode, router, arrival, ant.cost, ant.hop_budget
            ),
            EventKind::AntGeneration { router } => format!("antgen {router}"),
            EventKind::DataGeneration { pair } => format!("datagen {pair}"),
            EventKind::RoundTick => "round".into(),
            EventKind::TopologyChange { index } => format!("change {index}"),
            EventKind::Snapshot => "snapshot".into(),
            EventKind::ScenarioEnd => "end".into(),
        };
        format!("{} {} {}\n", self.time, self.seq, body)
    }
}

/// Result of [`Engine::step`].
#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Processed(Event),
    Exhausted,
}

/// Record of one probability update, for the optional update trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpdateRecord {
    pub time: SimTime,
    pub update: ReinforcementUpdate,
    pub p_after: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinishedPacket {
    pub source: RouterId,
    pub destination: RouterId,
    pub trace: Vec<RouterId>,
    pub delivered: bool,
    pub delay: SimTime,
}

impl FinishedPacket {
    /// Hops taken to delivery; `None` for dropped packets.
    pub fn hops_to_delivery(&self) -> Option<usize> {
        self.delivered.then(|| self.trace.len() - 1)
    }
}

#[derive(Clone, Debug)]
enum Protocol {
    LinkState { tables: Vec<DetTable>, horizon: usize },
    DistanceVector { tables: Vec<DetTable> },
    PathVector { tables: Vec<PathVectorTable> },
    QRouting { q: QTable },
    Ants { tables: ProbTables },
    Static { tables: ProbTables },
}

pub struct Engine {
    cfg: ScenarioConfig,
    /// Topology as configured; interface indices never change, so the
    /// learning tables stay aligned. Removed links are marked down.
    base: Topology,
    /// Topology with removed routers isolated; the deterministic tables
    /// index into this one.
    live: Topology,
    link_up: Vec<bool>,
    removed: Vec<bool>,
    now: SimTime,
    seq: u64,
    queue: BinaryHeap<Event>,
    rng: ChaCha8Rng,
    busy_until: Vec<Vec<SimTime>>,
    protocol: Protocol,
    masks: Option<NegMasks>,
    learning: AntLearning,
    ant_budget: u32,
    ant_sources: Vec<RouterId>,
    ant_weights: Vec<f64>,
    data_pairs: Vec<(RouterId, RouterId, f64)>,
    split_hop: Option<(RouterId, RouterId)>,
    ticking: bool,
    last_table_change: SimTime,
    hasher: Sha256,
    events: u64,
    next_packet_id: u64,
    packets: PacketCounters,
    messages: MessageCounters,
    finished: Vec<FinishedPacket>,
    snapshots: Vec<(SimTime, ProbTables)>,
    coverage_curve: Vec<(f64, f64)>,
    update_trace: Option<Vec<UpdateRecord>>,
    ended: bool,
}

fn label_to_id(t: &Topology, label: u32) -> Result<RouterId, SimError> {
    t.router_by_label(label).ok_or(SimError::UnknownLabel(label))
}

fn find_link(t: &Topology, a: RouterId, b: RouterId) -> Option<(usize, bool)> {
    t.links().iter().enumerate().find_map(|(i, l)| {
        if l.a == a && l.b == b {
            Some((i, false))
        } else if l.a == b && l.b == a {
            Some((i, true))
        } else {
            None
        }
    })
}

impl Engine {
    /// Builds the engine and schedules the initial events. Fails on invalid
    /// configs, unreadable files and disconnected topologies.
    pub fn new(cfg: ScenarioConfig) -> Result<Engine, SimError> {
        cfg.validate()?;
        let base = match &cfg.topology {
            TopologySource::Given(t) => t.clone(),
            TopologySource::Spec(spec) => generate(spec)?,
            TopologySource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| ConfigError::Io { path: path.clone(), source })?;
                load_topology(&text)
                    .map_err(|e| ConfigError::File { path: path.clone(), message: e.to_string() })?
            }
        };
        if !base.is_connected() {
            return Err(SimError::Disconnected);
        }
        let n = base.router_count();
        let learning = AntLearning {
            cost_function: CostFunction::new(cfg.ants.cost_shape, cfg.ants.gain)?,
            row_timing: cfg.ants.forward_row,
            backward_learning: !cfg.ants.backward,
        };
        let ant_budget = cfg.ants.hop_budget.unwrap_or(4 * base.diameter()?.max(1) as u32);
        let protocol = match cfg.protocol {
            ProtocolKind::LinkState => Protocol::LinkState { tables: link_state_partial(&base, 0), horizon: 0 },
            ProtocolKind::DistanceVector => {
                Protocol::DistanceVector { tables: dv_round(&dv_cold_start(&base), &base, cfg.dv_infinity).0 }
            }
            ProtocolKind::PathVector => {
                Protocol::PathVector { tables: pv_round(&vec![PathVectorTable::empty(n); n], &base).0 }
            }
            ProtocolKind::QRouting => Protocol::QRouting { q: QTable::new(&base, cfg.q.initial) },
            ProtocolKind::Ants => Protocol::Ants { tables: ProbTables::init_uniform(&base)? },
            ProtocolKind::Static => {
                let path = cfg.static_tables.as_ref().expect("validated");
                let text = std::fs::read_to_string(path)
                    .map_err(|source| ConfigError::Io { path: path.clone(), source })?;
                Protocol::Static { tables: ProbTables::parse_dump(&text, &base)? }
            }
        };
        let ant_sources = if cfg.ants.sources.is_empty() {
            base.routers().collect()
        } else {
            cfg.ants.sources.iter().map(|&l| label_to_id(&base, l)).collect::<Result<_, _>>()?
        };
        let ant_weights = match &cfg.ants.destinations {
            Destinations::Uniform => vec![1.0; n],
            Destinations::Weighted(w) => {
                let mut v = vec![0.0; n];
                for &(l, x) in w {
                    v[label_to_id(&base, l)?.0] = x;
                }
                v
            }
        };
        let data_pairs = if cfg.data.pairs.is_empty() {
            if cfg.data.rate > 0.0 {
                base.routers()
                    .flat_map(|s| base.routers().filter(move |&d| d != s).map(move |d| (s, d, cfg.data.rate)))
                    .collect()
            } else {
                Vec::new()
            }
        } else {
            cfg.data
                .pairs
                .iter()
                .map(|&(s, d, r)| Ok((label_to_id(&base, s)?, label_to_id(&base, d)?, r)))
                .collect::<Result<_, SimError>>()?
        };
        let split_hop = match cfg.metrics.split_hop {
            Some((a, b)) => Some((label_to_id(&base, a)?, label_to_id(&base, b)?)),
            None => None,
        };
        for c in &cfg.changes {
            match c.kind {
                ChangeKind::RemoveRouter(l) => {
                    label_to_id(&base, l)?;
                }
                ChangeKind::SetLinkCost { a, b, .. } => {
                    let (ia, ib) = (label_to_id(&base, a)?, label_to_id(&base, b)?);
                    find_link(&base, ia, ib).ok_or(SimError::UnknownLink(a, b))?;
                }
            }
        }

        let mut e = Engine {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            busy_until: base.routers().map(|r| vec![0; base.degree(r)]).collect(),
            link_up: vec![true; base.link_count()],
            removed: vec![false; n],
            live: base.clone(),
            masks: cfg.neg_level.map(NegMasks::new),
            base,
            now: 0,
            seq: 0,
            queue: BinaryHeap::new(),
            protocol,
            learning,
            ant_budget,
            ant_sources,
            ant_weights,
            data_pairs,
            split_hop,
            ticking: false,
            last_table_change: 0,
            hasher: Sha256::new(),
            events: 0,
            next_packet_id: 0,
            packets: PacketCounters::default(),
            messages: MessageCounters::default(),
            finished: Vec::new(),
            snapshots: Vec::new(),
            coverage_curve: Vec::new(),
            update_trace: None,
            ended: false,
            cfg,
        };
        e.count_initial_messages();
        e.schedule_initial();
        Ok(e)
    }

    fn count_initial_messages(&mut self) {
        match &self.protocol {
            Protocol::LinkState { .. } => self.count_flood(),
            Protocol::DistanceVector { .. } => {
                self.messages.rounds += 1;
                self.messages.dv_entries += dv_round_messages(&self.live) as u64;
            }
            Protocol::PathVector { .. } => {
                // The first round only carries each router's own identity.
                self.messages.rounds += 1;
                self.messages.pv_vectors += self.live.routers().map(|r| self.live.degree(r) as u64).sum::<u64>();
            }
            _ => {}
        }
    }

    fn count_flood(&mut self) {
        if let Ok(run) = run_link_state(&self.live) {
            self.messages.ls_flood_traversals += run.flood_link_traversals as u64;
            self.messages.ls_payload_units += run.payload_units as u64;
        } else {
            // Disconnected after a removal: every live router still floods
            // once across every live link.
            let live_routers = self.live.routers().filter(|r| self.live.degree(*r) > 0).count();
            self.messages.ls_flood_traversals += (live_routers * self.live.link_count()) as u64;
        }
    }

    fn schedule_initial(&mut self) {
        let end = ms_to_ticks(self.cfg.duration_ms);
        if self.cfg.protocol.is_deterministic() {
            self.ticking = true;
            self.schedule(ms_to_ticks(self.cfg.round_ms), EventKind::RoundTick);
        }
        if self.cfg.protocol == ProtocolKind::Ants && self.cfg.ants.rate > 0.0 {
            for r in self.ant_sources.clone() {
                let at = self.exp_gap(self.cfg.ants.rate);
                self.schedule(at, EventKind::AntGeneration { router: r });
            }
        }
        for k in 0..self.data_pairs.len() {
            let at = ms_to_ticks(self.cfg.data.start_ms) + self.exp_gap(self.data_pairs[k].2);
            self.schedule(at, EventKind::DataGeneration { pair: k });
        }
        for k in 0..self.cfg.changes.len() {
            self.schedule(ms_to_ticks(self.cfg.changes[k].at_ms), EventKind::TopologyChange { index: k });
        }
        if self.cfg.snapshot_ms > 0.0 {
            self.schedule(0, EventKind::Snapshot);
        }
        self.schedule(end, EventKind::ScenarioEnd);
    }

    fn exp_gap(&mut self, rate_per_ms: f64) -> SimTime {
        let gap_ms: f64 = Exp::new(rate_per_ms).expect("positive rate").sample(&mut self.rng);
        ms_to_ticks(gap_ms).max(1)
    }

    /// Adds an event at absolute time `time` (clamped to now).
    pub fn schedule(&mut self, time: SimTime, kind: EventKind) {
        self.seq += 1;
        self.queue.push(Event { time: time.max(self.now), seq: self.seq, kind });
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn topology(&self) -> &Topology {
        &self.base
    }

    pub fn record_updates(&mut self) {
        self.update_trace.get_or_insert_with(Vec::new);
    }

    /// `time,router,row_dest,interface,delta,p_after` (routers by label).
    pub fn update_trace_csv(&self) -> String {
        let mut out = String::from("time,router,row_dest,interface,delta,p_after\n");
        for u in self.update_trace.iter().flatten() {
            writeln!(
                out,
                "{},{},{},{},{:.6},{:.6}",
                ticks_to_ms(u.time),
                self.base.label(u.update.router),
                self.base.label(u.update.row_destination),
                self.base.port(u.update.router, u.update.interface).name,
                u.update.delta,
                u.p_after
            )
            .unwrap();
        }
        out
    }

    pub fn event_log_hash(&self) -> String {
        let digest = self.hasher.clone().finalize();
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        })
    }

    pub fn finished_packets(&self) -> &[FinishedPacket] {
        &self.finished
    }

    pub fn q_table(&self) -> Option<&QTable> {
        match &self.protocol {
            Protocol::QRouting { q } => Some(q),
            _ => None,
        }
    }

    pub fn negative_masks(&self) -> Option<&NegMasks> {
        self.masks.as_ref()
    }

    /// Pops and processes the earliest event. After the scenario end has
    /// been processed, or once nothing is queued, returns `Exhausted`.
    pub fn step(&mut self) -> Result<Step, SimError> {
        if self.ended {
            return Ok(Step::Exhausted);
        }
        let Some(ev) = self.queue.pop() else { return Ok(Step::Exhausted) };
        debug_assert!(ev.time >= self.now, "clock went backwards");
        self.now = ev.time;
        self.events += 1;
        self.hasher.update(ev.log_line().as_bytes());
        let processed = ev.clone();
        match ev.kind {
            EventKind::PacketArrival { packet, router, arrival } => self.on_packet(packet, router, arrival)?,
            EventKind::AntArrival { ant, router, arrival } => self.on_ant(ant, router, arrival)?,
            EventKind::AntGeneration { router } => self.on_ant_generation(router)?,
            EventKind::DataGeneration { pair } => self.on_data_generation(pair)?,
            EventKind::RoundTick => self.on_round(),
            EventKind::TopologyChange { index } => self.on_change(index)?,
            EventKind::Snapshot => self.on_snapshot()?,
            EventKind::ScenarioEnd => self.ended = true,
        }
        Ok(Step::Processed(processed))
    }

    pub fn run_to_end(&mut self) -> Result<(), SimError> {
        while let Step::Processed(_) = self.step()? {}
        Ok(())
    }

    fn delay_of(&self, r: RouterId, i: InterfaceId) -> SimTime {
        match self.cfg.delay {
            DelayModel::Cost => self.base.port(r, i).cost_out.units(),
            DelayModel::Fixed(c) => c.units(),
        }
    }

    /// Starts a transmission on `(r, i)` and returns when it reaches the
    /// far end, or `None` if the link is down.
    fn transmit(&mut self, r: RouterId, i: InterfaceId, fifo: bool) -> Option<SimTime> {
        if !self.link_up[self.base.port(r, i).link] {
            return None;
        }
        let delay = self.delay_of(r, i);
        let finish = if fifo {
            let start = self.busy_until[r.0][i].max(self.now);
            self.busy_until[r.0][i] = start + delay;
            start + delay
        } else {
            self.now + delay
        };
        Some(finish)
    }

    fn busy_interfaces(&self, r: RouterId) -> Vec<InterfaceId> {
        (0..self.base.degree(r)).filter(|&i| self.busy_until[r.0][i] > self.now).collect()
    }

    fn finish_packet(&mut self, p: Packet, delivered: bool) {
        self.finished.push(FinishedPacket {
            source: p.source,
            destination: p.destination,
            delay: p.delivered_at.unwrap_or(self.now) - p.created_at,
            trace: p.trace,
            delivered,
        });
    }

    fn on_data_generation(&mut self, pair: usize) -> Result<(), SimError> {
        let (s, d, rate) = self.data_pairs[pair];
        if self.cfg.data.max_packets.is_some_and(|m| self.packets.generated >= m) {
            return Ok(());
        }
        let gap = self.exp_gap(rate);
        self.schedule(self.now + gap, EventKind::DataGeneration { pair });
        if self.removed[s.0] || self.removed[d.0] {
            return Ok(());
        }
        self.next_packet_id += 1;
        self.packets.generated += 1;
        let packet = Packet {
            id: self.next_packet_id,
            source: s,
            destination: d,
            hop_budget: self.cfg.data.hop_budget,
            trace: Vec::new(),
            created_at: self.now,
            delivered_at: None,
        };
        self.on_packet(packet, s, None)
    }

    fn on_packet(&mut self, mut p: Packet, x: RouterId, arrival: Option<InterfaceId>) -> Result<(), SimError> {
        p.trace.push(x);
        let d = p.destination;
        if x == d {
            p.delivered_at = Some(self.now);
            self.packets.delivered += 1;
            self.finish_packet(p, true);
            return Ok(());
        }
        if p.trace.len() > p.hop_budget as usize {
            self.packets.dropped_ttl += 1;
            self.finish_packet(p, false);
            return Ok(());
        }
        let Some(i) = self.choose_data_interface(&p, x, arrival)? else {
            self.packets.dropped_no_route += 1;
            self.finish_packet(p, false);
            return Ok(());
        };
        let Some(finish) = self.transmit(x, i, true) else {
            self.packets.dropped_link_down += 1;
            self.finish_packet(p, false);
            return Ok(());
        };
        if let Protocol::QRouting { q } = &mut self.protocol {
            let y = self.base.port(x, i).neighbor;
            let zeta = ticks_to_ms(finish - self.now);
            let updated = q_update(q.get(x, d, i), q.best(y, d), zeta, self.cfg.q.eta)?;
            q.set(x, d, i, updated);
            self.messages.q_estimates += 1;
        }
        let port = self.base.port(x, i);
        let (router, arrival) = (port.neighbor, Some(port.peer));
        self.schedule(finish, EventKind::PacketArrival { packet: p, router, arrival });
        Ok(())
    }

    fn choose_data_interface(
        &mut self,
        p: &Packet,
        x: RouterId,
        arrival: Option<InterfaceId>,
    ) -> Result<Option<InterfaceId>, SimError> {
        let d = p.destination;
        let policy = self.cfg.forward_policy;
        let busy = if policy == ForwardPolicy::Deflection { self.busy_interfaces(x) } else { Vec::new() };
        let choice = match &self.protocol {
            Protocol::LinkState { tables, .. } | Protocol::DistanceVector { tables } => {
                tables[x.0].get(d).and_then(|e| self.live_to_base(x, e.interface))
            }
            Protocol::PathVector { tables } => tables[x.0].best(d).and_then(|pv| self.live_to_base(x, pv.interface)),
            Protocol::QRouting { q } => {
                let row = q_forward_row(q, x, d, self.cfg.q.variant);
                let policy = if self.cfg.q.variant == QVariant::Argmax { ForwardPolicy::Argmax } else { policy };
                Some(choose_interface(row.as_slice(), policy, &mut self.rng, &[], &busy)?)
            }
            Protocol::Ants { tables } | Protocol::Static { tables } => {
                let row = match &self.masks {
                    Some(m) => m.effective_row(tables, x, p.source, d, arrival),
                    None => tables.row(x, d).cloned(),
                };
                match row {
                    Some(row) => Some(choose_interface(row.as_slice(), policy, &mut self.rng, &[], &busy)?),
                    None => None,
                }
            }
        };
        Ok(choice)
    }

    fn live_to_base(&self, r: RouterId, i: InterfaceId) -> Option<InterfaceId> {
        self.base.interface_by_name(r, &self.live.port(r, i).name)
    }

    fn on_ant_generation(&mut self, src: RouterId) -> Result<(), SimError> {
        if self.cfg.ants.max_ants.is_some_and(|m| self.messages.ants_generated >= m)
            || self.cfg.ants.stop_ms.is_some_and(|s| self.now >= ms_to_ticks(s))
        {
            return Ok(());
        }
        if self.cfg.ants.rate > 0.0 {
            let gap = self.exp_gap(self.cfg.ants.rate);
            self.schedule(self.now + gap, EventKind::AntGeneration { router: src });
        }
        if self.removed[src.0] {
            return Ok(());
        }
        let weights: Vec<f64> = self
            .base
            .routers()
            .map(|d| if d == src || self.removed[d.0] { 0.0 } else { self.ant_weights[d.0] })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Ok(());
        }
        let mut x = self.rng.gen::<f64>() * total;
        let mut dst = src;
        for (k, w) in weights.iter().enumerate() {
            if *w > 0.0 {
                dst = RouterId(k);
                if x < *w {
                    break;
                }
                x -= w;
            }
        }
        let f = self.cfg.ants.uniform_fraction;
        let mode = if f >= 1.0 || (f > 0.0 && self.rng.gen::<f64>() < f) { AntMode::Uniform } else { AntMode::Regular };
        let with_stack = self.cfg.ants.backward || self.masks.is_some();
        self.messages.ants_generated += 1;
        self.on_ant(Ant::new(src, dst, mode, self.ant_budget, with_stack), src, None)
    }

    fn on_ant(&mut self, mut ant: Ant, x: RouterId, arrival: Option<InterfaceId>) -> Result<(), SimError> {
        let Protocol::Ants { tables } = &mut self.protocol else { return Ok(()) };
        if arrival.is_some() {
            if let Some(masks) = self.masks.as_mut() {
                if let Some(signal) = detect_signal(&self.base, &ant, x) {
                    self.messages.neg_signals += 1;
                    if negative_reinforce(masks, tables, &signal).is_err() {
                        self.messages.neg_rejected += 1;
                    }
                    self.messages.ants_discarded_signal += 1;
                    return Ok(());
                }
            }
        }
        let step = process_forward_ant(&self.base, tables, x, &mut ant, arrival, &self.learning, &mut self.rng)?;
        if let Some(u) = step.update {
            self.messages.reinforcements += 1;
            if let Some(trace) = self.update_trace.as_mut() {
                let p_after = tables.row(u.router, u.row_destination).map_or(0.0, |r| r.get(u.interface));
                trace.push(UpdateRecord { time: self.now, update: u, p_after });
            }
        }
        match step.action {
            AntAction::Delivered => {
                self.messages.ants_delivered += 1;
                if self.cfg.ants.backward {
                    match process_backward_ant(&self.base, tables, &ant, &self.learning.cost_function)? {
                        BackwardOutcome::Applied(ups) => {
                            self.messages.backward_updates += ups.len() as u64;
                            if let Some(trace) = self.update_trace.as_mut() {
                                for u in ups {
                                    let p_after =
                                        tables.row(u.router, u.row_destination).map_or(0.0, |r| r.get(u.interface));
                                    trace.push(UpdateRecord { time: self.now, update: u, p_after });
                                }
                            }
                        }
                        BackwardOutcome::Discarded => self.messages.ants_discarded_cycle += 1,
                    }
                }
            }
            AntAction::Discarded => self.messages.ants_discarded_budget += 1,
            AntAction::Forward(i) => {
                self.messages.ant_hops += 1;
                match self.transmit(x, i, self.cfg.ants.share_fifo) {
                    Some(finish) => {
                        let port = self.base.port(x, i);
                        let (router, arrival) = (port.neighbor, Some(port.peer));
                        self.schedule(finish, EventKind::AntArrival { ant, router, arrival });
                    }
                    None => self.messages.ants_lost_link_down += 1,
                }
            }
        }
        Ok(())
    }

    fn on_round(&mut self) {
        let bound = self.cfg.dv_infinity;
        let live = &self.live;
        let changed = match &mut self.protocol {
            Protocol::LinkState { tables, horizon } => {
                *horizon += 1;
                let next = link_state_partial(live, *horizon);
                let changed = next != *tables;
                *tables = next;
                changed
            }
            Protocol::DistanceVector { tables } => {
                let (next, changed) = dv_round(tables, live, bound);
                *tables = next;
                self.messages.dv_entries += dv_round_messages(live) as u64;
                changed
            }
            Protocol::PathVector { tables } => {
                let advertised: u64 = live
                    .routers()
                    .map(|r| live.degree(r) as u64 * tables[r.0].lists.iter().filter(|l| !l.is_empty()).count() as u64)
                    .sum();
                let (next, changed) = pv_round(tables, live);
                *tables = next;
                self.messages.pv_vectors += advertised;
                changed
            }
            _ => false,
        };
        self.messages.rounds += 1;
        if changed {
            self.last_table_change = self.now;
            self.schedule(self.now + ms_to_ticks(self.cfg.round_ms), EventKind::RoundTick);
        } else {
            self.ticking = false;
        }
    }

    fn on_change(&mut self, index: usize) -> Result<(), SimError> {
        let change = self.cfg.changes[index].clone();
        match change.kind {
            ChangeKind::RemoveRouter(label) => {
                let r = label_to_id(&self.base, label)?;
                self.removed[r.0] = true;
                for (k, l) in self.base.links().iter().enumerate() {
                    if l.a == r || l.b == r {
                        self.link_up[k] = false;
                    }
                }
                let before = self.live.clone();
                self.live = before.isolate_router(r);
                let live = &self.live;
                let remap = |x: RouterId, i: InterfaceId| live.interface_by_name(x, &before.port(x, i).name);
                match &mut self.protocol {
                    Protocol::DistanceVector { tables } => {
                        for (x, table) in tables.iter_mut().enumerate() {
                            for e in table.entries.iter_mut() {
                                *e = e.and_then(|mut e| {
                                    e.interface = remap(RouterId(x), e.interface)?;
                                    Some(e)
                                });
                            }
                        }
                        tables[r.0] = DetTable::empty(live.router_count());
                    }
                    Protocol::PathVector { tables } => {
                        for (x, table) in tables.iter_mut().enumerate() {
                            let mut fresh = PathVectorTable::empty(live.router_count());
                            if x != r.0 {
                                for (d, list) in table.lists.iter().enumerate() {
                                    for pv in list {
                                        if let Some(i) = remap(RouterId(x), pv.interface) {
                                            let mut pv = pv.clone();
                                            pv.interface = i;
                                            fresh.insert(RouterId(d), pv);
                                        }
                                    }
                                }
                            }
                            *table = fresh;
                        }
                    }
                    _ => {}
                }
            }
            ChangeKind::SetLinkCost { a, b, cost_ab, cost_ba } => {
                let (ia, ib) = (label_to_id(&self.base, a)?, label_to_id(&self.base, b)?);
                for t in [&mut self.base, &mut self.live] {
                    if let Some((k, flipped)) = find_link(t, ia, ib) {
                        let (x, y) = if flipped { (cost_ba, cost_ab) } else { (cost_ab, cost_ba) };
                        t.set_link_costs(k, x, y);
                    }
                }
            }
        }
        if let Protocol::LinkState { tables, horizon } = &mut self.protocol {
            *horizon = self.live.router_count();
            *tables = link_state_partial(&self.live, *horizon);
            self.last_table_change = self.now;
            self.count_flood();
        }
        if self.cfg.protocol.is_deterministic() && !self.ticking {
            self.ticking = true;
            self.schedule(self.now + ms_to_ticks(self.cfg.round_ms), EventKind::RoundTick);
        }
        Ok(())
    }

    fn on_snapshot(&mut self) -> Result<(), SimError> {
        let tables = self.prob_tables();
        let cov = reachability_coverage(&tables, self.coverage_topology(), self.cfg.metrics.eps)?;
        self.coverage_curve.push((ticks_to_ms(self.now), cov));
        self.snapshots.push((self.now, tables));
        let next = self.now + ms_to_ticks(self.cfg.snapshot_ms);
        if next <= ms_to_ticks(self.cfg.duration_ms) {
            self.schedule(next, EventKind::Snapshot);
        }
        Ok(())
    }

    fn coverage_topology(&self) -> &Topology {
        if self.cfg.protocol.is_deterministic() {
            &self.live
        } else {
            &self.base
        }
    }

    /// Probability view of the current tables: the learned rows for the ant
    /// and static protocols, one-hot rows for deterministic next hops, and
    /// the configured derivation for Q-routing.
    pub fn prob_tables(&self) -> ProbTables {
        match &self.protocol {
            Protocol::LinkState { tables, .. } => det_as_prob(tables, &self.live, None),
            Protocol::DistanceVector { tables } => det_as_prob(tables, &self.live, Some(self.cfg.dv_infinity)),
            Protocol::PathVector { tables } => {
                let det: Vec<DetTable> = tables
                    .iter()
                    .map(|tb| DetTable {
                        entries: tb
                            .lists
                            .iter()
                            .map(|l| {
                                l.first().map(|pv| crate::tables::DetEntry { interface: pv.interface, cost: pv.cost })
                            })
                            .collect(),
                    })
                    .collect();
                det_as_prob(&det, &self.live, None)
            }
            Protocol::QRouting { q } => {
                let mut out = ProbTables::empty(self.base.router_count());
                for x in self.base.routers() {
                    for d in self.base.routers().filter(|&d| d != x) {
                        if self.base.degree(x) > 0 {
                            out.set_row(x, d, Some(q_forward_row(q, x, d, self.cfg.q.variant)));
                        }
                    }
                }
                out
            }
            Protocol::Ants { tables } | Protocol::Static { tables } => tables.clone(),
        }
    }

    /// Coverage of the tables as they stand, without disturbing the run.
    pub fn anytime_snapshot(&self) -> Result<f64, SimError> {
        Ok(reachability_coverage(&self.prob_tables(), self.coverage_topology(), self.cfg.metrics.eps)?)
    }

    /// `r=<label> d=<label> p=[...]` dump of [`Engine::prob_tables`].
    pub fn tables_dump(&self) -> String {
        self.prob_tables().dump(self.coverage_topology())
    }

    /// Packets still travelling (queued arrival events).
    pub fn packets_in_flight(&self) -> u64 {
        self.queue.iter().filter(|e| matches!(e.kind, EventKind::PacketArrival { .. })).count() as u64
    }

    pub fn report(&self) -> Result<MetricsReport, SimError> {
        let tables = self.prob_tables();
        let coverage = reachability_coverage(&tables, self.coverage_topology(), self.cfg.metrics.eps)?;
        let delivered: Vec<&[RouterId]> =
            self.finished.iter().filter(|f| f.delivered).map(|f| f.trace.as_slice()).collect();
        let split = self.split_hop.map(|(a, b)| split_ratio(delivered.iter().copied(), uses_hop(a, b)));
        let loop_stats = loop_statistics(self.finished.iter().map(|f| f.trace.as_slice()));
        let mut packets = self.packets.clone();
        packets.in_flight = self.packets_in_flight();
        let mut messages = self.messages.clone();
        messages.ants_in_flight =
            self.queue.iter().filter(|e| matches!(e.kind, EventKind::AntArrival { .. })).count() as u64;
        let convergence_time_ms = if self.cfg.protocol.is_deterministic() {
            (!self.ticking).then(|| ticks_to_ms(self.last_table_change))
        } else if self.snapshots.len() >= 2 {
            convergence_time(&self.snapshots, self.cfg.metrics.convergence_delta, self.cfg.metrics.convergence_window)?
                .map(ticks_to_ms)
        } else {
            None
        };
        let mut per_dest: Vec<Vec<f64>> = vec![Vec::new(); self.base.router_count()];
        for f in self.finished.iter().filter(|f| f.delivered) {
            per_dest[f.destination.0].push(ticks_to_ms(f.delay));
        }
        let delays = per_dest
            .iter_mut()
            .enumerate()
            .filter_map(|(d, v)| percentiles(self.base.label(RouterId(d)), v))
            .collect();
        Ok(MetricsReport {
            protocol: self.cfg.protocol.name().into(),
            seed: self.cfg.seed,
            duration_ms: self.cfg.duration_ms,
            events_processed: self.events,
            coverage,
            coverage_curve: self.coverage_curve.clone(),
            split,
            loop_stats,
            messages,
            packets,
            convergence_time_ms,
            delays,
        })
    }
}

/// Everything a finished scenario produces.
pub struct ScenarioOutcome {
    pub report: MetricsReport,
    pub tables_dump: String,
    pub event_log_hash: String,
    pub engine: Engine,
}

/// Runs a scenario to its end.
pub fn run_scenario(cfg: ScenarioConfig) -> Result<ScenarioOutcome, SimError> {
    let mut engine = Engine::new(cfg)?;
    engine.run_to_end()?;
    Ok(ScenarioOutcome {
        report: engine.report()?,
        tables_dump: engine.tables_dump(),
        event_log_hash: engine.event_log_hash(),
        engine,
    })
}
