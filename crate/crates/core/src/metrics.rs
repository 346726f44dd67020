//! Scoring of finished (or running) scenarios: soft-reachability coverage
//! against the loop-free-path oracle, traffic split ratios, loop statistics,
//! table convergence and the per-run [`MetricsReport`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::tables::ProbTables;
use crate::topology::{enumerate_loop_free_paths, loop_free_first_hops, RouterId, Topology};

/// Default probability floor for "represented in the table".
pub const DEFAULT_EPS: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("path enumeration from {src} to {dst} was truncated at {limit} paths")]
    Truncated { src: RouterId, dst: RouterId, limit: usize },
    #[error("eps must lie in (0, 1)")]
    Eps,
    #[error("at least two snapshots are needed")]
    TooFewSnapshots,
}

/// Fraction of valid first hops that carry probability at least `eps`.
///
/// A triple `(r, d, i)` is valid when interface `i` of `r` starts at least
/// one loop-free path to `d`. Missing rows count as zero probability. A
/// topology with no valid triple has coverage 1.
pub fn reachability_coverage(tables: &ProbTables, t: &Topology, eps: f64) -> Result<f64, MetricsError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(MetricsError::Eps);
    }
    let (mut valid, mut covered) = (0usize, 0usize);
    for r in t.routers() {
        for d in t.routers().filter(|&d| d != r) {
            let row = tables.row(r, d);
            for i in loop_free_first_hops(t, r, d) {
                valid += 1;
                if row.is_some_and(|row| row.get(i) >= eps) {
                    covered += 1;
                }
            }
        }
    }
    Ok(if valid == 0 { 1.0 } else { covered as f64 / valid as f64 })
}

/// [`reachability_coverage`] with valid first hops taken from the explicit
/// path enumeration. Slower; errors if any enumeration hits `max_paths`.
pub fn reachability_coverage_enumerated(
    tables: &ProbTables,
    t: &Topology,
    eps: f64,
    max_paths: usize,
) -> Result<f64, MetricsError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(MetricsError::Eps);
    }
    let (mut valid, mut covered) = (0usize, 0usize);
    for r in t.routers() {
        for d in t.routers().filter(|&d| d != r) {
            let e = enumerate_loop_free_paths(t, r, d, Some(max_paths));
            if e.truncated {
                return Err(MetricsError::Truncated { src: r, dst: d, limit: max_paths });
            }
            let mut firsts: Vec<usize> = e.paths.iter().map(|p| p.hops[0].interface).collect();
            firsts.dedup();
            for i in firsts {
                valid += 1;
                if tables.row(r, d).is_some_and(|row| row.get(i) >= eps) {
                    covered += 1;
                }
            }
        }
    }
    Ok(if valid == 0 { 1.0 } else { covered as f64 / valid as f64 })
}

/// Delivered-packet counts of two path classes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SplitRatio {
    pub group_a: usize,
    pub group_b: usize,
}

impl SplitRatio {
    /// `a / b`, undefined when either group is empty.
    pub fn ratio(&self) -> Option<f64> {
        (self.group_a > 0 && self.group_b > 0).then(|| self.group_a as f64 / self.group_b as f64)
    }

    /// Share of group A among all counted packets.
    pub fn share_a(&self) -> Option<f64> {
        let n = self.group_a + self.group_b;
        (n > 0).then(|| self.group_a as f64 / n as f64)
    }

    pub fn merge(&self, other: &SplitRatio) -> SplitRatio {
        SplitRatio { group_a: self.group_a + other.group_a, group_b: self.group_b + other.group_b }
    }
}

pub fn split_ratio<'a>(
    traces: impl IntoIterator<Item = &'a [RouterId]>,
    in_group_a: impl Fn(&[RouterId]) -> bool,
) -> SplitRatio {
    let mut s = SplitRatio::default();
    for tr in traces {
        if in_group_a(tr) {
            s.group_a += 1;
        } else {
            s.group_b += 1;
        }
    }
    s
}

/// Predicate for [`split_ratio`]: the trace crosses `from -> to` directly.
pub fn uses_hop(from: RouterId, to: RouterId) -> impl Fn(&[RouterId]) -> bool {
    move |tr| tr.windows(2).any(|w| w[0] == from && w[1] == to)
}

/// First time after which every consecutive pair of snapshots differs by
/// less than `delta` (max row-wise L1), provided at least `window` such
/// transitions follow it. `None` means not converged.
pub fn convergence_time<T: Copy>(
    history: &[(T, ProbTables)],
    delta: f64,
    window: usize,
) -> Result<Option<T>, MetricsError> {
    if history.len() < 2 {
        return Err(MetricsError::TooFewSnapshots);
    }
    let mut k = history.len() - 1;
    while k > 0 && history[k - 1].1.max_row_l1_change(&history[k].1) < delta {
        k -= 1;
    }
    let stable = history.len() - 1 - k;
    Ok((stable >= window.max(1)).then_some(history[k].0))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct LoopStats {
    /// Traces that revisit some router.
    pub packets_in_loop: usize,
    /// Mean hops removed by erasing loops, over looping traces.
    pub mean_extra_hops: f64,
    /// Longest first loop seen, in hops.
    pub max_loop_length: usize,
}

/// Length of the first loop in `trace` (hops between the first repeated
/// router's two visits), if any.
pub fn first_loop(trace: &[RouterId]) -> Option<usize> {
    let mut seen = BTreeMap::new();
    for (k, r) in trace.iter().enumerate() {
        if let Some(prev) = seen.insert(*r, k) {
            return Some(k - prev);
        }
    }
    None
}

/// The trace with every cycle cut out (chronological loop erasure).
pub fn loop_erased(trace: &[RouterId]) -> Vec<RouterId> {
    let mut out: Vec<RouterId> = Vec::with_capacity(trace.len());
    for &r in trace {
        if let Some(pos) = out.iter().position(|&x| x == r) {
            out.truncate(pos + 1);
        } else {
            out.push(r);
        }
    }
    out
}

pub fn loop_statistics<'a>(traces: impl IntoIterator<Item = &'a [RouterId]>) -> LoopStats {
    let mut stats = LoopStats::default();
    let mut extra = 0usize;
    for tr in traces {
        if let Some(len) = first_loop(tr) {
            stats.packets_in_loop += 1;
            stats.max_loop_length = stats.max_loop_length.max(len);
            extra += tr.len() - loop_erased(tr).len();
        }
    }
    if stats.packets_in_loop > 0 {
        stats.mean_extra_hops = extra as f64 / stats.packets_in_loop as f64;
    }
    stats
}

/// `curve[n]` is the fraction of packets that took more than `n` hops
/// (undelivered packets count as still travelling).
pub fn survival_curve(hops: &[Option<usize>], max_n: usize) -> Vec<f64> {
    let total = hops.len().max(1) as f64;
    (0..=max_n).map(|n| hops.iter().filter(|h| h.is_none_or(|h| h > n)).count() as f64 / total).collect()
}

/// `(1 - q)^floor(n / m)`: chance of still circulating after `n` hops on a
/// loop of `m` routers when each loop traversal offers at least one exit
/// taken with probability `q`.
pub fn geometric_envelope(q: f64, m: usize, n: usize) -> f64 {
    (1.0 - q).powi((n / m.max(1)) as i32)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PacketCounters {
    pub generated: u64,
    pub delivered: u64,
    pub dropped_ttl: u64,
    pub dropped_no_route: u64,
    pub dropped_link_down: u64,
    pub in_flight: u64,
}

impl PacketCounters {
    pub fn dropped(&self) -> u64 {
        self.dropped_ttl + self.dropped_no_route + self.dropped_link_down
    }

    /// generated = delivered + dropped + in flight.
    pub fn conserved(&self) -> bool {
        self.generated == self.delivered + self.dropped() + self.in_flight
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MessageCounters {
    pub rounds: u64,
    pub dv_entries: u64,
    pub pv_vectors: u64,
    pub ls_flood_traversals: u64,
    pub ls_payload_units: u64,
    pub q_estimates: u64,
    pub ants_generated: u64,
    pub ant_hops: u64,
    pub ants_delivered: u64,
    pub ants_discarded_budget: u64,
    pub ants_discarded_cycle: u64,
    pub ants_discarded_signal: u64,
    pub ants_lost_link_down: u64,
    pub ants_in_flight: u64,
    pub reinforcements: u64,
    pub backward_updates: u64,
    pub neg_signals: u64,
    pub neg_rejected: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DelayPercentiles {
    pub destination: u32,
    pub count: usize,
    pub p50_ms: f64,
    pub p90_ms: f64,
    pub p99_ms: f64,
}

/// Nearest-rank percentiles of `delays` (ms), which need not be sorted.
pub fn percentiles(destination: u32, delays: &mut [f64]) -> Option<DelayPercentiles> {
    if delays.is_empty() {
        return None;
    }
    delays.sort_by(f64::total_cmp);
    let rank = |p: f64| delays[((p * delays.len() as f64).ceil() as usize).clamp(1, delays.len()) - 1];
    Some(DelayPercentiles { destination, count: delays.len(), p50_ms: rank(0.5), p90_ms: rank(0.9), p99_ms: rank(0.99) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub protocol: String,
    pub seed: u64,
    pub duration_ms: f64,
    pub events_processed: u64,
    /// Coverage of the final tables.
    pub coverage: f64,
    /// `(ms, coverage)` at each snapshot.
    pub coverage_curve: Vec<(f64, f64)>,
    pub split: Option<SplitRatio>,
    pub loop_stats: LoopStats,
    pub messages: MessageCounters,
    pub packets: PacketCounters,
    /// `None` when the tables had not settled.
    pub convergence_time_ms: Option<f64>,
    pub delays: Vec<DelayPercentiles>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One `metric,value` row per scalar, in a fixed order.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![
            ("protocol".into(), self.protocol.clone()),
            ("seed".into(), self.seed.to_string()),
            ("duration_ms".into(), self.duration_ms.to_string()),
            ("events_processed".into(), self.events_processed.to_string()),
            ("coverage".into(), format!("{:.6}", self.coverage)),
            ("split_group_a".into(), self.split.map_or(String::new(), |s| s.group_a.to_string())),
            ("split_group_b".into(), self.split.map_or(String::new(), |s| s.group_b.to_string())),
            (
                "split_ratio".into(),
                self.split.and_then(|s| s.ratio()).map_or("undefined".into(), |r| format!("{r:.6}")),
            ),
            ("loop_packets".into(), self.loop_stats.packets_in_loop.to_string()),
            ("loop_mean_extra_hops".into(), format!("{:.6}", self.loop_stats.mean_extra_hops)),
            ("loop_max_length".into(), self.loop_stats.max_loop_length.to_string()),
            (
                "convergence_time_ms".into(),
                self.convergence_time_ms.map_or("not_converged".into(), |t| t.to_string()),
            ),
        ];
        let p = &self.packets;
        for (k, v) in [
            ("packets_generated", p.generated),
            ("packets_delivered", p.delivered),
            ("packets_dropped_ttl", p.dropped_ttl),
            ("packets_dropped_no_route", p.dropped_no_route),
            ("packets_dropped_link_down", p.dropped_link_down),
            ("packets_in_flight", p.in_flight),
        ] {
            rows.push((k.into(), v.to_string()));
        }
        let m = &self.messages;
        for (k, v) in [
            ("rounds", m.rounds),
            ("dv_entries", m.dv_entries),
            ("pv_vectors", m.pv_vectors),
            ("ls_flood_traversals", m.ls_flood_traversals),
            ("ls_payload_units", m.ls_payload_units),
            ("q_estimates", m.q_estimates),
            ("ants_generated", m.ants_generated),
            ("ant_hops", m.ant_hops),
            ("ants_delivered", m.ants_delivered),
            ("ants_discarded_budget", m.ants_discarded_budget),
            ("ants_discarded_cycle", m.ants_discarded_cycle),
            ("ants_discarded_signal", m.ants_discarded_signal),
            ("ants_lost_link_down", m.ants_lost_link_down),
            ("ants_in_flight", m.ants_in_flight),
            ("reinforcements", m.reinforcements),
            ("backward_updates", m.backward_updates),
            ("neg_signals", m.neg_signals),
            ("neg_rejected", m.neg_rejected),
        ] {
            rows.push((k.into(), v.to_string()));
        }
        for d in &self.delays {
            rows.push((format!("delay_p50_ms[{}]", d.destination), d.p50_ms.to_string()));
            rows.push((format!("delay_p90_ms[{}]", d.destination), d.p90_ms.to_string()));
            rows.push((format!("delay_p99_ms[{}]", d.destination), d.p99_ms.to_string()));
        }
        let mut out = String::from("metric,value\n");
        for (k, v) in rows {
            writeln!(out, "{k},{v}").unwrap();
        }
        out
    }
}
