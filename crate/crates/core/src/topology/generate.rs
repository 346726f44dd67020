use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Topology, TopologyError};
use crate::cost::Cost;

/// Parametric test topologies.
///
/// Textual form (used by the CLI and scenario files) is `kind[:args]`, e.g.
/// `linear_chain:4`, `velcro:10,5,2`, `random_connected:8,0.4,1-4,7`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GeneratorSpec {
    LinearChain(usize),
    Ring(usize),
    Complete(usize),
    /// One direct `0 -> 1` link of `direct_cost` plus a chain of
    /// `sections` looped sections, each crossed at minimum cost `section_cost`.
    Velcro { direct_cost: Cost, sections: usize, section_cost: Cost },
    NegReinfLeft,
    NegReinfMiddle,
    NegReinfRight,
    RandomConnected { n: usize, edge_prob: f64, cost_min: u64, cost_max: u64, seed: u64 },
}

fn invalid(msg: impl Into<String>) -> TopologyError {
    TopologyError::InvalidParameter(msg.into())
}

pub fn generate(spec: &GeneratorSpec) -> Result<Topology, TopologyError> {
    let one = Cost::from_int(1);
    let mut b = Topology::builder();
    match *spec {
        GeneratorSpec::LinearChain(n) => {
            if n == 0 {
                return Err(invalid("linear_chain needs n >= 1"));
            }
            b.routers(0..n as u32)?;
            for i in 1..n as u32 {
                b.auto_link(i - 1, i, one)?;
            }
        }
        GeneratorSpec::Ring(n) => {
            if n < 3 {
                return Err(invalid("ring needs n >= 3"));
            }
            b.routers(0..n as u32)?;
            for i in 0..n as u32 {
                b.auto_link(i, (i + 1) % n as u32, one)?;
            }
        }
        GeneratorSpec::Complete(n) => {
            if n == 0 {
                return Err(invalid("complete needs n >= 1"));
            }
            b.routers(0..n as u32)?;
            for i in 0..n as u32 {
                for j in i + 1..n as u32 {
                    b.auto_link(i, j, one)?;
                }
            }
        }
        GeneratorSpec::Velcro { direct_cost, sections, section_cost } => {
            if direct_cost == Cost::ZERO || sections == 0 || section_cost.units() < 2 {
                return Err(invalid("velcro parameters must be strictly positive"));
            }
            velcro(&mut b, direct_cost, sections, section_cost)?;
        }
        GeneratorSpec::NegReinfLeft => {
            // 0=A 1=B 2=C(leaf) 3=D
            b.routers(0..4)?;
            b.link(0, "i1", 1, "i1", one, one)?;
            b.link(0, "i2", 2, "i1", one, one)?;
            b.link(0, "i3", 3, "i1", one, one)?;
            b.link(3, "i2", 1, "i2", one, one)?;
        }
        GeneratorSpec::NegReinfMiddle | GeneratorSpec::NegReinfRight => {
            // 0=A 1=B 2=C 3=D 4=E; the B-D-C-B cycle hangs off the A-B-E line.
            b.routers(0..5)?;
            b.link(0, "i1", 1, "i1", one, one)?;
            b.link(1, "i4", 3, "i1", one, one)?;
            b.link(3, "i5", 2, "i1", one, one)?;
            b.link(2, "i3", 1, "i3", one, one)?;
            b.link(1, "i2", 4, "i1", one, one)?;
            if matches!(spec, GeneratorSpec::NegReinfRight) {
                b.link(0, "i2", 2, "i7", one, one)?;
            }
        }
        GeneratorSpec::RandomConnected { n, edge_prob, cost_min, cost_max, seed } => {
            if n == 0 {
                return Err(invalid("random_connected needs n >= 1"));
            }
            if !(edge_prob > 0.0 && edge_prob <= 1.0) {
                return Err(invalid("edge_prob must lie in (0, 1]"));
            }
            if cost_min > cost_max {
                return Err(invalid("empty cost range"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut adj = vec![vec![false; n]; n];
            for i in 1..n {
                let j = rng.gen_range(0..i);
                adj[i][j] = true;
                adj[j][i] = true;
            }
            for i in 0..n {
                for j in i + 1..n {
                    if !adj[i][j] && rng.gen_bool(edge_prob) {
                        adj[i][j] = true;
                        adj[j][i] = true;
                    }
                }
            }
            b.routers(0..n as u32)?;
            for i in 0..n {
                for j in i + 1..n {
                    if adj[i][j] {
                        let c = Cost::from_int(rng.gen_range(cost_min..=cost_max));
                        b.auto_link(i as u32, j as u32, c)?;
                    }
                }
            }
        }
    }
    b.build()
}

/// Router 0 is A, router 1 is B. Section `j` joins gate `g_j` to `g_{j+1}`
/// through two relay routers `u_j`, `v_j` that are also linked to each other,
/// so every section is a K4 minus the gate-gate edge.
fn velcro(
    b: &mut super::TopologyBuilder,
    direct: Cost,
    sections: usize,
    section_cost: Cost,
) -> Result<(), TopologyError> {
    let half = Cost::from_units(section_cost.units() / 2);
    let rest = section_cost - half;
    b.routers([0, 1])?;
    b.auto_link(0, 1, direct)?;
    let mut next_label = 2u32;
    let mut gate = 0u32;
    for j in 0..sections {
        let exit = if j + 1 == sections {
            1
        } else {
            let g = next_label;
            next_label += 1;
            b.router(g)?;
            g
        };
        let (u, v) = (next_label, next_label + 1);
        next_label += 2;
        b.router(u)?;
        b.router(v)?;
        b.auto_link(gate, u, half)?;
        b.auto_link(gate, v, half)?;
        b.auto_link(u, v, section_cost)?;
        b.auto_link(u, exit, rest)?;
        b.auto_link(v, exit, rest)?;
        gate = exit;
    }
    Ok(())
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::LinearChain(n) => write!(f, "linear_chain:{n}"),
            GeneratorSpec::Ring(n) => write!(f, "ring:{n}"),
            GeneratorSpec::Complete(n) => write!(f, "complete:{n}"),
            GeneratorSpec::Velcro { direct_cost, sections, section_cost } => {
                write!(f, "velcro:{direct_cost},{sections},{section_cost}")
            }
            GeneratorSpec::NegReinfLeft => write!(f, "neg_reinf_left"),
            GeneratorSpec::NegReinfMiddle => write!(f, "neg_reinf_middle"),
            GeneratorSpec::NegReinfRight => write!(f, "neg_reinf_right"),
            GeneratorSpec::RandomConnected { n, edge_prob, cost_min, cost_max, seed } => {
                write!(f, "random_connected:{n},{edge_prob},{cost_min}-{cost_max},{seed}")
            }
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, args) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let args: Vec<&str> = if args.is_empty() { vec![] } else { args.split(',').map(str::trim).collect() };
        let bad = || invalid(format!("cannot parse generator `{s}`"));
        let count = |args: &[&str]| -> Result<usize, TopologyError> {
            match args {
                [n] => n.parse().map_err(|_| bad()),
                _ => Err(bad()),
            }
        };
        let cost = |t: &str| t.parse::<Cost>().map_err(|_| bad());
        Ok(match kind {
            "linear_chain" => GeneratorSpec::LinearChain(count(&args)?),
            "ring" => GeneratorSpec::Ring(count(&args)?),
            "complete" => GeneratorSpec::Complete(count(&args)?),
            "velcro" => match args.as_slice() {
                [d, k, c] => GeneratorSpec::Velcro {
                    direct_cost: cost(d)?,
                    sections: k.parse().map_err(|_| bad())?,
                    section_cost: cost(c)?,
                },
                _ => return Err(bad()),
            },
            "neg_reinf_left" if args.is_empty() => GeneratorSpec::NegReinfLeft,
            "neg_reinf_middle" if args.is_empty() => GeneratorSpec::NegReinfMiddle,
            "neg_reinf_right" if args.is_empty() => GeneratorSpec::NegReinfRight,
            "random_connected" => match args.as_slice() {
                [n, p, range, seed] => {
                    let (lo, hi) = range.split_once('-').ok_or_else(bad)?;
                    GeneratorSpec::RandomConnected {
                        n: n.parse().map_err(|_| bad())?,
                        edge_prob: p.parse().map_err(|_| bad())?,
                        cost_min: lo.parse().map_err(|_| bad())?,
                        cost_max: hi.parse().map_err(|_| bad())?,
                        seed: seed.parse().map_err(|_| bad())?,
                    }
                }
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        })
    }
}
