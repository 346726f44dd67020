//! Seeded discrete-event simulation of routing protocols.
//!
//! The crate compares constructive deterministic protocols (link-state,
//! distance-vector, path-vector) with destructive probabilistic ones
//! (Q-routing and ant-based reinforcement learning) on how well they keep
//! every loop-free path usable, how they split traffic, how loops decay and
//! what they cost in messages and rounds.
//!
//! Start with [`topology`] to build or load a graph, then either call a
//! protocol directly ([`deterministic`], [`rl`]) or run a full scenario with
//! [`sim::run_scenario`] and score it with [`metrics`].

pub mod cli;
pub mod cost;
pub mod deterministic;
pub mod metrics;
pub mod rl;
pub mod sim;
pub mod tables;
pub mod topology;

pub use cost::Cost;
pub use topology::{RouterId, Topology};
