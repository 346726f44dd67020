use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ReinforcementUpdate, RlError};
use crate::cost::Cost;
use crate::tables::{choose_interface, ForwardPolicy, ProbRow, ProbTables};
use crate::topology::{InterfaceId, RouterId, Topology};

/// How an ant picks its next interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AntMode {
    /// Uniformly over all interfaces.
    Uniform,
    /// Proportionally to the current row for the ant's destination.
    Regular,
}

/// One visited router as recorded on an ant's stack.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackEntry {
    pub router: RouterId,
    /// Cost accumulated on arrival at `router`.
    pub cost_at_node: Cost,
    /// Interface the ant arrived on; `None` at the source.
    pub arrived_on: Option<InterfaceId>,
    /// Interface the ant left on.
    pub chosen: InterfaceId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ant {
    pub source: RouterId,
    pub destination: RouterId,
    /// Cost accumulated so far, counting each link in the reverse direction
    /// (towards the source).
    pub cost: Cost,
    /// The same walk costed in the direction of travel.
    pub forward_cost: Cost,
    pub mode: AntMode,
    /// Visit record, kept for backward ants and negative reinforcement.
    pub stack: Option<Vec<StackEntry>>,
    /// Hops the ant may still take.
    pub hop_budget: u32,
}

impl Ant {
    pub fn new(source: RouterId, destination: RouterId, mode: AntMode, hop_budget: u32, with_stack: bool) -> Ant {
        Ant { source, destination, cost: Cost::ZERO, forward_cost: Cost::ZERO, mode, stack: with_stack.then(Vec::new), hop_budget }
    }
}

/// Shape of the non-decreasing cost transform `f` in `delta = gain / f(c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostShape {
    Identity,
    /// `a * c + b`
    Affine { a: f64, b: f64 },
    /// `c ^ gamma`
    Power { gamma: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostFunction {
    pub shape: CostShape,
    pub gain: f64,
}

impl Default for CostFunction {
    fn default() -> Self {
        CostFunction { shape: CostShape::Affine { a: 1.0, b: 1.0 }, gain: 1.0 }
    }
}

impl CostFunction {
    pub fn new(shape: CostShape, gain: f64) -> Result<CostFunction, RlError> {
        let ok = gain > 0.0
            && gain.is_finite()
            && match shape {
                CostShape::Identity => true,
                CostShape::Affine { a, b } => a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite(),
                CostShape::Power { gamma } => gamma >= 0.0 && gamma.is_finite(),
            };
        if ok {
            Ok(CostFunction { shape, gain })
        } else {
            Err(RlError::CostFunction)
        }
    }

    pub fn f(&self, c: Cost) -> f64 {
        let c = c.as_f64();
        match self.shape {
            CostShape::Identity => c,
            CostShape::Affine { a, b } => a * c + b,
            CostShape::Power { gamma } => c.powf(gamma),
        }
    }

    /// Reinforcement for cost `c`. Infinite when `f(c) == 0`.
    pub fn delta(&self, c: Cost) -> f64 {
        let f = self.f(c);
        if f <= 0.0 {
            f64::INFINITY
        } else {
            self.gain / f
        }
    }
}

impl FromStr for CostShape {
    type Err = String;

    /// `identity`, `affine:<a>,<b>` or `power:<gamma>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Result<Vec<f64>, _> =
            if args.is_empty() { Ok(vec![]) } else { args.split(',').map(|a| a.trim().parse()).collect() };
        let nums = nums.map_err(|_| format!("bad cost function `{s}`"))?;
        match (kind, nums.as_slice()) {
            ("identity", []) => Ok(CostShape::Identity),
            ("affine", [a, b]) => Ok(CostShape::Affine { a: *a, b: *b }),
            ("power", [g]) => Ok(CostShape::Power { gamma: *g }),
            _ => Err(format!("bad cost function `{s}`")),
        }
    }
}

/// Push-pull update: entry `k` becomes `(p_k + delta) / (1 + delta)` and
/// every other entry `p_j / (1 + delta)`. An infinite delta yields a one-hot
/// row.
pub fn ant_prob_update(row: &[f64], k: InterfaceId, delta: f64) -> Result<Vec<f64>, RlError> {
    if k >= row.len() {
        return Err(RlError::InterfaceOutOfRange { index: k, len: row.len() });
    }
    if delta.is_nan() || delta < 0.0 {
        return Err(RlError::NegativeInput);
    }
    if delta.is_infinite() {
        let mut v = vec![0.0; row.len()];
        v[k] = 1.0;
        return Ok(v);
    }
    let scale = 1.0 + delta;
    Ok(row
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            // Clamp away rounding so the reinforced entry never drops and
            // the others never rise.
            if j == k {
                ((p + delta) / scale).clamp(p, 1.0)
            } else {
                (p / scale).min(p)
            }
        })
        .collect())
}

/// Applies [`ant_prob_update`] in place and renormalizes once the row has
/// drifted measurably from one.
pub fn apply_ant_update(row: &mut ProbRow, k: InterfaceId, delta: f64) -> Result<(), RlError> {
    let updated = ant_prob_update(row.as_slice(), k, delta)?;
    row.values_mut().copy_from_slice(&updated);
    if (row.sum() - 1.0).abs() > 1e-12 {
        row.renormalize();
    }
    Ok(())
}

/// When a regular ant reads its forwarding row relative to the update it
/// has just applied at the same router.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowTiming {
    Before,
    #[default]
    After,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntLearning {
    pub cost_function: CostFunction,
    pub row_timing: RowTiming,
    /// Reinforce the row for the ant's source on every arrival. Off when a
    /// backward ant assigns the credit instead.
    pub backward_learning: bool,
}

impl Default for AntLearning {
    fn default() -> Self {
        AntLearning { cost_function: CostFunction::default(), row_timing: RowTiming::After, backward_learning: true }
    }
}

/// What happens to a forward ant after being processed at a router.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AntAction {
    Forward(InterfaceId),
    Delivered,
    /// Hop budget ran out before reaching the destination.
    Discarded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AntStep {
    pub update: Option<ReinforcementUpdate>,
    pub action: AntAction,
}

/// Backward-learning step for an ant at router `at`.
///
/// On arrival via `arrival` the reverse cost of that link is added to the
/// ant's cost and the row for the ant's *source* is reinforced on `arrival`.
/// The ant is then delivered, discarded (budget exhausted), or forwarded by
/// its mode. `arrival == None` means the ant is being launched at its source.
pub fn process_forward_ant<R: Rng + ?Sized>(
    t: &Topology,
    tables: &mut ProbTables,
    at: RouterId,
    ant: &mut Ant,
    arrival: Option<InterfaceId>,
    learning: &AntLearning,
    rng: &mut R,
) -> Result<AntStep, RlError> {
    let mut update = None;
    let mut early_choice = None;
    if let Some(k) = arrival {
        // Reverse cost: the row being reinforced routes back towards the source.
        ant.cost += t.port(at, k).cost_out;
        ant.forward_cost += t.port(at, k).cost_in;
        if learning.row_timing == RowTiming::Before && at != ant.destination {
            early_choice = Some(pick_next(t, tables, at, ant, rng)?);
        }
        if !learning.backward_learning {
            // Credit is left to a backward ant.
        } else if let Some(row) = tables.row_mut(at, ant.source) {
            let delta = learning.cost_function.delta(ant.cost);
            apply_ant_update(row, k, delta)?;
            update = Some(ReinforcementUpdate { router: at, row_destination: ant.source, interface: k, delta });
        }
    }
    if at == ant.destination {
        return Ok(AntStep { update, action: AntAction::Delivered });
    }
    if ant.hop_budget == 0 {
        return Ok(AntStep { update, action: AntAction::Discarded });
    }
    let next = match early_choice {
        Some(i) => i,
        None => pick_next(t, tables, at, ant, rng)?,
    };
    ant.hop_budget -= 1;
    if let Some(stack) = ant.stack.as_mut() {
        stack.push(StackEntry { router: at, cost_at_node: ant.forward_cost, arrived_on: arrival, chosen: next });
    }
    Ok(AntStep { update, action: AntAction::Forward(next) })
}

/// Next interface for an ant at `at` according to its mode.
pub fn pick_next<R: Rng + ?Sized>(
    t: &Topology,
    tables: &ProbTables,
    at: RouterId,
    ant: &Ant,
    rng: &mut R,
) -> Result<InterfaceId, RlError> {
    let deg = t.degree(at);
    if deg == 0 {
        return Err(RlError::NoInterfaces(at));
    }
    let uniform;
    let (row, policy) = match ant.mode {
        AntMode::Uniform => {
            uniform = vec![1.0; deg];
            (uniform.as_slice(), ForwardPolicy::Uniform)
        }
        AntMode::Regular => match tables.row(at, ant.destination) {
            Some(row) => (row.as_slice(), ForwardPolicy::Proportional),
            None => {
                uniform = vec![1.0; deg];
                (uniform.as_slice(), ForwardPolicy::Uniform)
            }
        },
    };
    Ok(choose_interface(row, policy, rng, &[], &[])?)
}
