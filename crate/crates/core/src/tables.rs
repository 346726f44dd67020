//! Routing tables shared by every protocol engine.
//!
//! Deterministic protocols fill [`DetTable`]s (one next hop per destination);
//! the learning protocols keep a [`ProbTables`] distribution over outgoing
//! interfaces, optionally derived from a [`QTable`].

use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::Cost;
use crate::topology::{InterfaceId, RouterId, Topology};

/// Rows must sum to one within this tolerance.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("router {0} has no interfaces")]
    NoInterfaces(RouterId),
    #[error("every interface is excluded")]
    AllExcluded,
    #[error("row is all zero")]
    AllZero,
    #[error("row has a negative or non-finite entry")]
    InvalidEntry,
    #[error("row sums to {0}, not 1")]
    NotNormalized(f64),
    #[error("interface {index} out of range for row of length {len}")]
    InterfaceOutOfRange { index: usize, len: usize },
    #[error("table dump line {line}: {message}")]
    Dump { line: usize, message: String },
}

/// Probability distribution over one router's interfaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbRow(Vec<f64>);

impl ProbRow {
    pub fn uniform(len: usize) -> ProbRow {
        ProbRow(vec![1.0 / len as f64; len])
    }

    pub fn one_hot(len: usize, k: usize) -> ProbRow {
        let mut v = vec![0.0; len];
        v[k] = 1.0;
        ProbRow(v)
    }

    pub fn new(values: Vec<f64>) -> Result<ProbRow, TableError> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(TableError::InvalidEntry);
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(TableError::NotNormalized(sum));
        }
        Ok(ProbRow(values))
    }

    /// Builds a row from nonnegative weights by scaling them to sum to one.
    pub fn from_weights(weights: Vec<f64>) -> Result<ProbRow, TableError> {
        if weights.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(TableError::InvalidEntry);
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(TableError::AllZero);
        }
        Ok(ProbRow(weights.into_iter().map(|w| w / sum).collect()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: InterfaceId) -> f64 {
        self.0[i]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Overwrites the row without validation; callers renormalize.
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    /// Rescales to sum to one, absorbing floating drift.
    pub fn renormalize(&mut self) {
        let s = self.sum();
        if s > 0.0 {
            self.0.iter_mut().for_each(|v| *v /= s);
        }
    }

    /// Lowest-index maximal entry.
    pub fn argmax(&self) -> InterfaceId {
        argmax(&self.0)
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Per-router, per-destination probability rows. A router has no row for
/// itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbTables {
    rows: Vec<Vec<Option<ProbRow>>>,
}

impl ProbTables {
    /// Uniform rows for every (router, destination) pair.
    pub fn init_uniform(t: &Topology) -> Result<ProbTables, TableError> {
        let rows = t.routers().map(|r| init_uniform(t, r)).collect::<Result<_, _>>()?;
        Ok(ProbTables { rows })
    }

    /// Tables with no rows at all; used for partially built views.
    pub fn empty(router_count: usize) -> ProbTables {
        ProbTables { rows: vec![vec![None; router_count]; router_count] }
    }

    pub fn router_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, r: RouterId, d: RouterId) -> Option<&ProbRow> {
        self.rows[r.0][d.0].as_ref()
    }

    pub fn row_mut(&mut self, r: RouterId, d: RouterId) -> Option<&mut ProbRow> {
        self.rows[r.0][d.0].as_mut()
    }

    pub fn set_row(&mut self, r: RouterId, d: RouterId, row: Option<ProbRow>) {
        self.rows[r.0][d.0] = row;
    }

    /// `(router, destination, row)` in router-then-destination order.
    pub fn iter(&self) -> impl Iterator<Item = (RouterId, RouterId, &ProbRow)> {
        self.rows.iter().enumerate().flat_map(|(r, dests)| {
            dests
                .iter()
                .enumerate()
                .filter_map(move |(d, row)| row.as_ref().map(|row| (RouterId(r), RouterId(d), row)))
        })
    }

    /// Largest L1 distance between corresponding rows; a row present in only
    /// one table counts as distance 2.
    pub fn max_row_l1_change(&self, other: &ProbTables) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, b) in self.rows.iter().flatten().zip(other.rows.iter().flatten()) {
            let d = match (a, b) {
                (Some(a), Some(b)) => a.0.iter().zip(&b.0).map(|(x, y)| (x - y).abs()).sum(),
                (None, None) => 0.0,
                _ => 2.0,
            };
            worst = worst.max(d);
        }
        worst
    }

    /// One line per row: `r=<id> d=<id> p=[v0,v1,...]`, six decimals.
    pub fn dump(&self, t: &Topology) -> String {
        let mut out = String::new();
        for (r, d, row) in self.iter() {
            let values: Vec<String> = row.0.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(out, "r={} d={} p=[{}]", t.label(r), t.label(d), values.join(",")).unwrap();
        }
        out
    }

    /// Reads a [`ProbTables::dump`]. Rows are renormalized after parsing since
    /// six decimals do not sum exactly to one.
    pub fn parse_dump(text: &str, t: &Topology) -> Result<ProbTables, TableError> {
        let mut tables = ProbTables::empty(t.router_count());
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| TableError::Dump { line, message };
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let mut parts = raw.split_whitespace();
            let mut field = |key: &str| -> Result<&str, TableError> {
                parts
                    .next()
                    .and_then(|p| p.strip_prefix(key))
                    .ok_or_else(|| err(format!("expected `{key}`")))
            };
            let router = |s: &str| -> Result<RouterId, TableError> {
                u32::from_str(s)
                    .ok()
                    .and_then(|l| t.router_by_label(l))
                    .ok_or_else(|| err(format!("unknown router `{s}`")))
            };
            let r = router(field("r=")?)?;
            let d = router(field("d=")?)?;
            let list = field("p=")?
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| err("expected `p=[...]`".into()))?;
            let values: Vec<f64> = list
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| err(format!("bad probability `{v}`"))))
                .collect::<Result<_, _>>()?;
            if values.len() != t.degree(r) {
                return Err(err(format!("row has {} entries, router has {} interfaces", values.len(), t.degree(r))));
            }
            let row = ProbRow::from_weights(values).map_err(|e| err(e.to_string()))?;
            tables.set_row(r, d, Some(row));
        }
        Ok(tables)
    }
}

/// Uniform rows for router `r`, indexed by destination (`None` for itself).
pub fn init_uniform(t: &Topology, r: RouterId) -> Result<Vec<Option<ProbRow>>, TableError> {
    let deg = t.degree(r);
    if deg == 0 {
        return Err(TableError::NoInterfaces(r));
    }
    Ok(t.routers().map(|d| (d != r).then(|| ProbRow::uniform(deg))).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetEntry {
    pub interface: InterfaceId,
    pub cost: Cost,
}

/// Deterministic next-hop table of one router, indexed by destination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetTable {
    pub entries: Vec<Option<DetEntry>>,
}

impl DetTable {
    pub fn empty(router_count: usize) -> DetTable {
        DetTable { entries: vec![None; router_count] }
    }

    pub fn get(&self, d: RouterId) -> Option<DetEntry> {
        self.entries[d.0]
    }
}

/// One-hot probability view of deterministic tables. Entries whose cost is
/// at or above `unreachable_at` are treated as missing.
pub fn det_as_prob(tables: &[DetTable], t: &Topology, unreachable_at: Option<Cost>) -> ProbTables {
    let mut out = ProbTables::empty(t.router_count());
    for r in t.routers() {
        for d in t.routers() {
            if let Some(e) = tables[r.0].get(d) {
                if unreachable_at.is_none_or(|bound| e.cost < bound) {
                    out.set_row(r, d, Some(ProbRow::one_hot(t.degree(r), e.interface)));
                }
            }
        }
    }
    out
}

/// Q estimates `Q_x(d, i)`: expected delivery cost from router `x` to `d`
/// when leaving on interface `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    values: Vec<Vec<Vec<f64>>>,
}

impl QTable {
    pub fn new(t: &Topology, initial: f64) -> QTable {
        let values = t
            .routers()
            .map(|r| t.routers().map(|_| vec![initial; t.degree(r)]).collect())
            .collect();
        QTable { values }
    }

    pub fn row(&self, x: RouterId, d: RouterId) -> &[f64] {
        &self.values[x.0][d.0]
    }

    pub fn get(&self, x: RouterId, d: RouterId, i: InterfaceId) -> f64 {
        self.values[x.0][d.0][i]
    }

    pub fn set(&mut self, x: RouterId, d: RouterId, i: InterfaceId, q: f64) {
        self.values[x.0][d.0][i] = q;
    }

    /// Best (lowest) delivery estimate from `x` to `d`; zero at `d` itself.
    pub fn best(&self, x: RouterId, d: RouterId) -> f64 {
        if x == d {
            return 0.0;
        }
        self.values[x.0][d.0].iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Lowest-index interface with the lowest estimate.
    pub fn best_interface(&self, x: RouterId, d: RouterId) -> InterfaceId {
        let row = &self.values[x.0][d.0];
        let mut best = 0;
        for (i, &q) in row.iter().enumerate() {
            if q < row[best] {
                best = i;
            }
        }
        best
    }
}

/// An explicit loop-free route advertised by path-vector routing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathVector {
    pub cost: Cost,
    /// Owning router first, destination last.
    pub routers: Vec<RouterId>,
    pub interface: InterfaceId,
}

impl PathVector {
    pub fn has_repeat(&self) -> bool {
        let mut seen = self.routers.clone();
        seen.sort();
        seen.windows(2).any(|w| w[0] == w[1])
    }
}

/// Ordered path-vector lists of one router, indexed by destination. The
/// first element of each list is the advertised best.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathVectorTable {
    pub lists: Vec<Vec<PathVector>>,
}

impl PathVectorTable {
    pub fn empty(router_count: usize) -> PathVectorTable {
        PathVectorTable { lists: vec![Vec::new(); router_count] }
    }

    pub fn best(&self, d: RouterId) -> Option<&PathVector> {
        self.lists[d.0].first()
    }

    /// Inserts keeping (cost, path, interface) order. Panics if the vector
    /// repeats a router.
    pub fn insert(&mut self, d: RouterId, pv: PathVector) {
        assert!(!pv.has_repeat(), "path-vector with a repeated router: {:?}", pv.routers);
        let list = &mut self.lists[d.0];
        if let Err(pos) = list.binary_search(&pv) {
            list.insert(pos, pv);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForwardPolicy {
    Argmax,
    #[default]
    Proportional,
    Uniform,
    Deflection,
}

impl FromStr for ForwardPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "argmax" => Ok(ForwardPolicy::Argmax),
            "proportional" => Ok(ForwardPolicy::Proportional),
            "uniform" => Ok(ForwardPolicy::Uniform),
            "deflection" => Ok(ForwardPolicy::Deflection),
            _ => Err(format!("unknown forward policy `{s}`")),
        }
    }
}

/// Picks an outgoing interface from `row`.
///
/// `exclude` interfaces are never chosen. `busy` marks interfaces whose link
/// is currently transmitting; only [`ForwardPolicy::Deflection`] looks at it,
/// falling back to the argmax when every allowed link is busy. A
/// proportional draw over allowed entries that are all zero degrades to a
/// uniform draw.
pub fn choose_interface<R: Rng + ?Sized>(
    row: &[f64],
    policy: ForwardPolicy,
    rng: &mut R,
    exclude: &[InterfaceId],
    busy: &[InterfaceId],
) -> Result<InterfaceId, TableError> {
    let allowed: Vec<InterfaceId> = (0..row.len()).filter(|i| !exclude.contains(i)).collect();
    if allowed.is_empty() {
        return Err(TableError::AllExcluded);
    }
    let best_allowed = || {
        let mut best = allowed[0];
        for &i in &allowed {
            if row[i] > row[best] {
                best = i;
            }
        }
        best
    };
    let uniform_over = |rng: &mut R, set: &[InterfaceId]| set[rng.gen_range(0..set.len())];
    Ok(match policy {
        ForwardPolicy::Argmax => best_allowed(),
        ForwardPolicy::Uniform => uniform_over(rng, &allowed),
        ForwardPolicy::Proportional => {
            let total: f64 = allowed.iter().map(|&i| row[i]).sum();
            if total <= 0.0 {
                uniform_over(rng, &allowed)
            } else {
                let mut x = rng.gen::<f64>() * total;
                let mut pick = *allowed.last().unwrap();
                for &i in &allowed {
                    if row[i] <= 0.0 {
                        continue;
                    }
                    if x < row[i] {
                        pick = i;
                        break;
                    }
                    x -= row[i];
                    pick = i;
                }
                pick
            }
        }
        ForwardPolicy::Deflection => {
            let best = best_allowed();
            if !busy.contains(&best) {
                best
            } else {
                let free: Vec<InterfaceId> = allowed.iter().copied().filter(|i| !busy.contains(i)).collect();
                if free.is_empty() {
                    best
                } else {
                    uniform_over(rng, &free)
                }
            }
        }
    })
}

/// Ratio derivation `Q_i / sum_k Q_k`.
pub fn prob_from_q(q_row: &[f64]) -> Result<ProbRow, TableError> {
    ProbRow::from_weights(q_row.to_vec())
}
