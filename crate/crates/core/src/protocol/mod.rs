//! Per-node contention-resolution protocols.
//!
//! Every protocol is driven by the engine in two halves per slot: [`Protocol::decide`]
//! before the channel is resolved and [`Protocol::advance`] once the node's
//! [`Observation`] is known. A protocol never sees the outcome before it commits
//! to transmitting or not, and it never sees a node identifier.

mod ofa;
mod window;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::Observation;

pub use ofa::{OfaNode, OfaParams, OfaState, ofa_delta_upper_bound};
pub use window::{
    EboboNode, EboboParams, EboboSchedule, LlibNode, LlibParams, LlibSchedule, WindowNode,
    ebobo_window_schedule, llib_repetitions, llib_schedule,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("one-fail adaptive needs e < delta <= {max:.6}, got {delta}")]
    OfaDelta { delta: f64, max: f64 },
    #[error("exp back-on/back-off needs 0 < delta < 1/e, got {delta}")]
    EboboDelta { delta: f64 },
    #[error("loglog-iterated back-off needs r > 1, got {r}")]
    LlibFactor { r: f64 },
    #[error("probability must lie in [0, 1], got {p}")]
    Probability { p: f64 },
    #[error("unknown protocol {0:?} (expected ofa, ebobo or llib)")]
    UnknownProtocol(String),
    #[error("{0}")]
    Invalid(String),
}

/// Misuse of a protocol state machine by its driver.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ContractViolation {
    #[error("node already delivered its message and is idle")]
    Terminal,
    #[error("advance for slot {slot} without a matching decide")]
    AdvanceWithoutDecide { slot: u64 },
    #[error("slot indices start at 1")]
    ZeroSlot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub transmit: bool,
}

/// A contention-resolution protocol as run by a single node.
pub trait Protocol {
    /// Whether to transmit in `slot` (1-based, global).
    fn decide<R: Rng + ?Sized>(
        &mut self,
        slot: u64,
        rng: &mut R,
    ) -> Result<Decision, ContractViolation>;

    /// Applies the observation of `slot`, which must be the slot last decided.
    fn advance(&mut self, slot: u64, obs: Observation) -> Result<(), ContractViolation>;

    /// True once the node's message has been delivered.
    fn is_terminal(&self) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    Ofa,
    Ebobo,
    Llib,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [ProtocolKind::Ofa, ProtocolKind::Ebobo, ProtocolKind::Llib];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::Ofa => "ofa",
            ProtocolKind::Ebobo => "ebobo",
            ProtocolKind::Llib => "llib",
        }
    }

    /// Stable tag mixed into seed derivation.
    pub(crate) fn stream_tag(self) -> u64 {
        match self {
            ProtocolKind::Ofa => 1,
            ProtocolKind::Ebobo => 2,
            ProtocolKind::Llib => 3,
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ProtocolKind::Ofa => "One-fail Adaptive",
            ProtocolKind::Ebobo => "Exp Back-on/Back-off",
            ProtocolKind::Llib => "Loglog-iterated Back-off",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolKind {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ofa" | "one-fail" | "one-fail-adaptive" => Ok(ProtocolKind::Ofa),
            "ebobo" | "exp-back-on-back-off" => Ok(ProtocolKind::Ebobo),
            "llib" | "loglog" | "loglog-iterated-backoff" => Ok(ProtocolKind::Llib),
            other => Err(ParamError::UnknownProtocol(other.to_string())),
        }
    }
}

/// A validated protocol together with its constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProtocolParams {
    Ofa(OfaParams),
    Ebobo(EboboParams),
    Llib(LlibParams),
}

impl ProtocolParams {
    /// The constants used for the reference ratio table.
    pub fn default_for(kind: ProtocolKind) -> Self {
        match kind {
            ProtocolKind::Ofa => ProtocolParams::Ofa(OfaParams::new(2.72).unwrap()),
            ProtocolKind::Ebobo => ProtocolParams::Ebobo(EboboParams::new(0.366).unwrap()),
            ProtocolKind::Llib => ProtocolParams::Llib(LlibParams::new(2.0).unwrap()),
        }
    }

    /// Builds parameters for `kind`; `delta` is read by OFA/EBOBO and `r` by LLIB.
    /// Missing values fall back to the reference constants.
    pub fn build(kind: ProtocolKind, delta: Option<f64>, r: Option<f64>) -> Result<Self, ParamError> {
        let defaults = Self::default_for(kind);
        Ok(match kind {
            ProtocolKind::Ofa => ProtocolParams::Ofa(OfaParams::new(delta.unwrap_or(defaults.value()))?),
            ProtocolKind::Ebobo => {
                ProtocolParams::Ebobo(EboboParams::new(delta.unwrap_or(defaults.value()))?)
            }
            ProtocolKind::Llib => ProtocolParams::Llib(LlibParams::new(r.unwrap_or(defaults.value()))?),
        })
    }

    pub fn kind(&self) -> ProtocolKind {
        match self {
            ProtocolParams::Ofa(_) => ProtocolKind::Ofa,
            ProtocolParams::Ebobo(_) => ProtocolKind::Ebobo,
            ProtocolParams::Llib(_) => ProtocolKind::Llib,
        }
    }

    /// The protocol's single tuning constant (delta, or r for LLIB).
    pub fn value(&self) -> f64 {
        match self {
            ProtocolParams::Ofa(p) => p.delta(),
            ProtocolParams::Ebobo(p) => p.delta(),
            ProtocolParams::Llib(p) => p.r(),
        }
    }

    pub fn spawn_node(&self) -> AnyNode {
        match *self {
            ProtocolParams::Ofa(p) => AnyNode::Ofa(OfaNode::new(p)),
            ProtocolParams::Ebobo(p) => AnyNode::Ebobo(EboboNode::new(EboboSchedule::new(p))),
            ProtocolParams::Llib(p) => AnyNode::Llib(LlibNode::new(LlibSchedule::new(p))),
        }
    }
}

/// Dispatching wrapper so the engine can hold any protocol's nodes.
#[derive(Clone, Debug)]
pub enum AnyNode {
    Ofa(OfaNode),
    Ebobo(EboboNode),
    Llib(LlibNode),
}

impl Protocol for AnyNode {
    fn decide<R: Rng + ?Sized>(
        &mut self,
        slot: u64,
        rng: &mut R,
    ) -> Result<Decision, ContractViolation> {
        match self {
            AnyNode::Ofa(n) => n.decide(slot, rng),
            AnyNode::Ebobo(n) => n.decide(slot, rng),
            AnyNode::Llib(n) => n.decide(slot, rng),
        }
    }

    fn advance(&mut self, slot: u64, obs: Observation) -> Result<(), ContractViolation> {
        match self {
            AnyNode::Ofa(n) => n.advance(slot, obs),
            AnyNode::Ebobo(n) => n.advance(slot, obs),
            AnyNode::Llib(n) => n.advance(slot, obs),
        }
    }

    fn is_terminal(&self) -> bool {
        match self {
            AnyNode::Ofa(n) => n.is_terminal(),
            AnyNode::Ebobo(n) => n.is_terminal(),
            AnyNode::Llib(n) => n.is_terminal(),
        }
    }
}
