//! Flat `key = value` scenario files.
//!
//! ```text
//! # comment
//! topology.spec = linear_chain:4      # or topology.file = chain.topo
//! protocol = ants
//! duration_ms = 5000
//! ants.rate = 0.2
//! ```
//!
//! Keys are dotted paths into [`ScenarioConfig`]; a key given twice (in the
//! file or as an override) keeps the last value.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::cost::Cost;
use crate::deterministic::DEFAULT_INFINITY;
use crate::metrics::DEFAULT_EPS;
use crate::rl::{CostShape, NegQualifier, QVariant, RowTiming};
use crate::tables::ForwardPolicy;
use crate::topology::{GeneratorSpec, Topology};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum TopologySource {
    File(PathBuf),
    Spec(GeneratorSpec),
    #[serde(skip_serializing)]
    Given(Topology),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    LinkState,
    DistanceVector,
    PathVector,
    QRouting,
    Ants,
    /// Fixed probability tables loaded from a dump; nothing learns.
    Static,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::LinkState => "link_state",
            ProtocolKind::DistanceVector => "distance_vector",
            ProtocolKind::PathVector => "path_vector",
            ProtocolKind::QRouting => "q_routing",
            ProtocolKind::Ants => "ants",
            ProtocolKind::Static => "static",
        }
    }

    pub fn is_deterministic(self) -> bool {
        matches!(self, ProtocolKind::LinkState | ProtocolKind::DistanceVector | ProtocolKind::PathVector)
    }
}

impl FromStr for ProtocolKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            ProtocolKind::LinkState,
            ProtocolKind::DistanceVector,
            ProtocolKind::PathVector,
            ProtocolKind::QRouting,
            ProtocolKind::Ants,
            ProtocolKind::Static,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| format!("unknown protocol `{s}`"))
    }
}

/// How long a link takes to cross.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayModel {
    /// The direction's cost, read as milliseconds.
    Cost,
    Fixed(Cost),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Destinations {
    Uniform,
    /// `(label, weight)` pairs.
    Weighted(Vec<(u32, f64)>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataConfig {
    /// Packets per ms for every ordered router pair (ignored when `pairs` is
    /// non-empty).
    pub rate: f64,
    /// `(source label, destination label, packets per ms)`.
    pub pairs: Vec<(u32, u32, f64)>,
    pub hop_budget: u32,
    pub start_ms: f64,
    /// Stop generating after this many packets.
    pub max_packets: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QConfig {
    pub eta: f64,
    pub variant: QVariant,
    pub initial: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AntConfig {
    /// Ants per ms launched at each source router.
    pub rate: f64,
    /// Fraction of ants that are uniform; the rest are regular.
    pub uniform_fraction: f64,
    pub destinations: Destinations,
    /// Routers that launch ants (labels); empty means all.
    pub sources: Vec<u32>,
    pub cost_shape: CostShape,
    pub gain: f64,
    /// Credit assignment by backward ants instead of backward learning.
    pub backward: bool,
    /// `None` means four times the diameter.
    pub hop_budget: Option<u32>,
    pub forward_row: RowTiming,
    /// Ants wait in the same FIFOs as data.
    pub share_fifo: bool,
    pub max_ants: Option<u64>,
    pub stop_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ChangeKind {
    RemoveRouter(u32),
    /// First link between the two labels gets new `(a->b, b->a)` costs.
    SetLinkCost { a: u32, b: u32, cost_ab: Cost, cost_ba: Cost },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopologyChange {
    pub at_ms: f64,
    pub kind: ChangeKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsConfig {
    pub eps: f64,
    pub convergence_delta: f64,
    pub convergence_window: usize,
    /// Split traffic by whether traces cross this `(from, to)` label hop.
    pub split_hop: Option<(u32, u32)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub topology: TopologySource,
    pub protocol: ProtocolKind,
    pub forward_policy: ForwardPolicy,
    pub duration_ms: f64,
    pub seed: u64,
    pub delay: DelayModel,
    pub data: DataConfig,
    pub q: QConfig,
    pub ants: AntConfig,
    pub neg_level: Option<NegQualifier>,
    pub dv_infinity: Cost,
    pub round_ms: f64,
    pub static_tables: Option<PathBuf>,
    pub changes: Vec<TopologyChange>,
    /// Table snapshot period; 0 disables snapshots.
    pub snapshot_ms: f64,
    pub metrics: MetricsConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            topology: TopologySource::Spec(GeneratorSpec::LinearChain(4)),
            protocol: ProtocolKind::Ants,
            forward_policy: ForwardPolicy::Proportional,
            duration_ms: 1000.0,
            seed: 1,
            delay: DelayModel::Cost,
            data: DataConfig { rate: 0.0, pairs: Vec::new(), hop_budget: 64, start_ms: 0.0, max_packets: None },
            q: QConfig { eta: 0.5, variant: QVariant::Argmax, initial: 0.0 },
            ants: AntConfig {
                rate: 0.1,
                uniform_fraction: 0.0,
                destinations: Destinations::Uniform,
                sources: Vec::new(),
                cost_shape: CostShape::Affine { a: 1.0, b: 1.0 },
                gain: 0.1,
                backward: false,
                hop_budget: None,
                forward_row: RowTiming::After,
                share_fifo: true,
                max_ants: None,
                stop_ms: None,
            },
            neg_level: None,
            dv_infinity: DEFAULT_INFINITY,
            round_ms: 1.0,
            static_tables: None,
            changes: Vec::new(),
            snapshot_ms: 0.0,
            metrics: MetricsConfig {
                eps: DEFAULT_EPS,
                convergence_delta: 1e-3,
                convergence_window: 5,
                split_hop: None,
            },
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| bad(key, value, e))
}

fn bad(key: &str, value: &str, reason: impl std::fmt::Display) -> ConfigError {
    ConfigError::BadValue { key: key.into(), value: value.into(), reason: reason.to_string() }
}

fn optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    if matches!(value, "" | "none" | "auto") {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn list<T>(value: &str, item: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(item).collect()
}

impl ScenarioConfig {
    /// Parses a config file. Relative file paths inside it resolve against
    /// the file's directory.
    pub fn from_file(path: &Path) -> Result<ScenarioConfig, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let mut cfg = ScenarioConfig::from_text(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn from_text(text: &str) -> Result<ScenarioConfig, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: n + 1 })?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        if let TopologySource::File(p) = &mut self.topology {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = &mut self.static_tables {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// Applies one `key=value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "topology.file" => self.topology = TopologySource::File(value.into()),
            "topology.spec" => self.topology = TopologySource::Spec(parse(key, value)?),
            "protocol" => self.protocol = parse(key, value)?,
            "forward_policy" => self.forward_policy = parse(key, value)?,
            "duration_ms" => self.duration_ms = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "delay.model" => {
                self.delay = match value {
                    "cost" => DelayModel::Cost,
                    "fixed" => DelayModel::Fixed(match self.delay {
                        DelayModel::Fixed(c) => c,
                        DelayModel::Cost => Cost::from_int(1),
                    }),
                    _ => return Err(bad(key, value, "expected `cost` or `fixed`")),
                }
            }
            "delay.fixed_ms" => self.delay = DelayModel::Fixed(parse(key, value)?),
            "data.rate" => self.data.rate = parse(key, value)?,
            "data.pairs" => {
                self.data.pairs = list(value, |item| {
                    let (pair, rate) = item.split_once(':')?;
                    let (s, d) = pair.split_once('>')?;
                    Some((s.trim().parse().ok()?, d.trim().parse().ok()?, rate.trim().parse().ok()?))
                })
                .ok_or_else(|| bad(key, value, "expected `src>dst:rate, ...`"))?
            }
            "data.hop_budget" => self.data.hop_budget = parse(key, value)?,
            "data.start_ms" => self.data.start_ms = parse(key, value)?,
            "data.max_packets" => self.data.max_packets = optional(key, value)?,
            "q.eta" => self.q.eta = parse(key, value)?,
            "q.variant" => self.q.variant = parse(key, value)?,
            "q.initial" => self.q.initial = parse(key, value)?,
            "ants.rate" => self.ants.rate = parse(key, value)?,
            "ants.uniform_fraction" => self.ants.uniform_fraction = parse(key, value)?,
            "ants.destinations" => {
                self.ants.destinations = if value == "uniform" {
                    Destinations::Uniform
                } else {
                    Destinations::Weighted(
                        list(value, |item| {
                            let (l, w) = item.split_once(':')?;
                            Some((l.trim().parse().ok()?, w.trim().parse().ok()?))
                        })
                        .ok_or_else(|| bad(key, value, "expected `uniform` or `label:weight, ...`"))?,
                    )
                }
            }
            "ants.sources" => {
                self.ants.sources = if value == "all" {
                    Vec::new()
                } else {
                    list(value, |s| s.parse().ok()).ok_or_else(|| bad(key, value, "expected router labels"))?
                }
            }
            "ants.cost_function" => self.ants.cost_shape = parse(key, value)?,
            "ants.gain" => self.ants.gain = parse(key, value)?,
            "ants.backward" => self.ants.backward = parse(key, value)?,
            "ants.hop_budget" => self.ants.hop_budget = optional(key, value)?,
            "ants.forward_row" => {
                self.ants.forward_row = match value {
                    "after" => RowTiming::After,
                    "before" => RowTiming::Before,
                    _ => return Err(bad(key, value, "expected `after` or `before`")),
                }
            }
            "ants.share_fifo" => self.ants.share_fifo = parse(key, value)?,
            "ants.max_ants" => self.ants.max_ants = optional(key, value)?,
            "ants.stop_ms" => self.ants.stop_ms = optional(key, value)?,
            "neg.level" => self.neg_level = optional(key, value)?,
            "dv.infinity" => self.dv_infinity = parse(key, value)?,
            "round_ms" => self.round_ms = parse(key, value)?,
            "tables.file" => self.static_tables = Some(value.into()),
            "changes" => {
                self.changes = list(value, parse_change).ok_or_else(|| {
                    bad(key, value, "expected `ms:remove_router:label` or `ms:set_link_cost:a:b:cab:cba`")
                })?
            }
            "snapshot_ms" => self.snapshot_ms = parse(key, value)?,
            "metrics.eps" => self.metrics.eps = parse(key, value)?,
            "metrics.convergence_delta" => self.metrics.convergence_delta = parse(key, value)?,
            "metrics.convergence_window" => self.metrics.convergence_window = parse(key, value)?,
            "metrics.split_hop" => {
                self.metrics.split_hop = if value == "none" {
                    None
                } else {
                    let (a, b) = value.split_once('>').ok_or_else(|| bad(key, value, "expected `from>to`"))?;
                    Some((parse(key, a.trim())?, parse(key, b.trim())?))
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Checks ranges that do not depend on the topology.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.into()));
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !(self.duration_ms > 0.0 && self.duration_ms.is_finite()) {
            return invalid("duration_ms must be positive");
        }
        if !finite_nonneg(self.data.rate) || self.data.pairs.iter().any(|p| !finite_nonneg(p.2)) {
            return invalid("data rates must be nonnegative");
        }
        if self.data.hop_budget == 0 {
            return invalid("data.hop_budget must be positive");
        }
        if !finite_nonneg(self.ants.rate) {
            return invalid("ants.rate must be nonnegative");
        }
        if !(0.0..=1.0).contains(&self.ants.uniform_fraction) {
            return invalid("ants.uniform_fraction must lie in [0, 1]");
        }
        if self.ants.hop_budget == Some(0) {
            return invalid("ants.hop_budget must be positive");
        }
        if let Destinations::Weighted(w) = &self.ants.destinations {
            if w.iter().any(|(_, x)| !finite_nonneg(*x)) || w.iter().all(|(_, x)| *x == 0.0) {
                return invalid("destination weights must be nonnegative and not all zero");
            }
        }
        if !(self.q.eta > 0.0 && self.q.eta <= 1.0) {
            return invalid("q.eta must lie in (0, 1]");
        }
        if !finite_nonneg(self.q.initial) {
            return invalid("q.initial must be nonnegative");
        }
        if !(self.round_ms > 0.0 && self.round_ms.is_finite()) {
            return invalid("round_ms must be positive");
        }
        if !finite_nonneg(self.snapshot_ms) {
            return invalid("snapshot_ms must be nonnegative");
        }
        if !(self.metrics.eps > 0.0 && self.metrics.eps < 1.0) {
            return invalid("metrics.eps must lie in (0, 1)");
        }
        if self.protocol == ProtocolKind::Static && self.static_tables.is_none() {
            return invalid("protocol static needs tables.file");
        }
        if self.changes.iter().any(|c| !finite_nonneg(c.at_ms)) {
            return invalid("change times must be nonnegative");
        }
        crate::rl::CostFunction::new(self.ants.cost_shape, self.ants.gain)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }
}

fn parse_change(item: &str) -> Option<TopologyChange> {
    let parts: Vec<&str> = item.split(':').map(str::trim).collect();
    let at_ms = parts.first()?.parse().ok()?;
    let kind = match parts.get(1..)? {
        ["remove_router", l] => ChangeKind::RemoveRouter(l.parse().ok()?),
        ["set_link_cost", a, b, cab, cba] => ChangeKind::SetLinkCost {
            a: a.parse().ok()?,
            b: b.parse().ok()?,
            cost_ab: cab.parse().ok()?,
            cost_ba: cba.parse().ok()?,
        },
        _ => return None,
    };
    Some(TopologyChange { at_ms, kind })
}
