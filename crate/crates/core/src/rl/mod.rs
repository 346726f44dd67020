//! Destructive probabilistic protocols: Q-routing, ants with backward
//! learning, backward (stack-replaying) ants, and negative reinforcement at
//! three qualification levels.
//!
//! Everything here is a pure update on tables passed in by the caller; the
//! event engine in [`crate::sim`] decides when each update happens.

mod ants;
mod backward;
mod negative;
mod q_routing;

use serde::Serialize;
use thiserror::Error;

use crate::tables::TableError;
use crate::topology::{InterfaceId, RouterId};

pub use ants::{
    ant_prob_update, apply_ant_update, pick_next, process_forward_ant, Ant, AntAction, AntLearning, AntMode, AntStep,
    CostFunction, CostShape, RowTiming, StackEntry,
};
pub use backward::{process_backward_ant, BackwardOutcome};
pub use negative::{detect_signal, is_false_negative, negative_reinforce, NegMasks, NegQualifier, NegSignal};
pub use q_routing::{q_forward_row, q_update, QValue, QVariant};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RlError {
    #[error("step size must lie in (0, 1]")]
    StepSize,
    #[error("negative input to an update rule")]
    NegativeInput,
    #[error("interface {index} out of range for row of length {len}")]
    InterfaceOutOfRange { index: usize, len: usize },
    #[error("cost function must be non-decreasing with a positive gain")]
    CostFunction,
    #[error("router {0} has no interfaces")]
    NoInterfaces(RouterId),
    #[error("malformed ant stack: {0}")]
    MalformedStack(&'static str),
    #[error("signal would leave router {router} with an all-zero row")]
    AllZeroRow { router: RouterId },
    #[error(transparent)]
    Table(#[from] TableError),
}

/// One applied probability reinforcement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReinforcementUpdate {
    pub router: RouterId,
    /// Destination whose row was updated.
    pub row_destination: RouterId,
    pub interface: InterfaceId,
    pub delta: f64,
}
