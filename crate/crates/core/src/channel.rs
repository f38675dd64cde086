//! The slotted single-hop channel.
//!
//! A slot carries a message only when exactly one node transmits. Nodes have
//! no collision detection: a garbled slot and an empty slot look the same to
//! everyone, including the transmitters.

use std::fmt;

use thiserror::Error;

/// Simulator-side index of an activated node, dense in `[0, k)`.
///
/// Protocols never see this value; it exists for bookkeeping only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// What the channel carried in one slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotOutcome {
    Silence,
    Success(NodeId),
    Collision,
}

impl SlotOutcome {
    pub fn is_success(self) -> bool {
        matches!(self, SlotOutcome::Success(_))
    }
}

/// What a single node perceives at the end of a slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observation {
    /// The node's own message went through (acknowledged in the same slot).
    OwnDelivery,
    /// Another node's message was received.
    ReceivedOther(NodeId),
    /// Silence, collision, or a failed transmission; indistinguishable.
    Nothing,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("node {node} did not transmit but the slot was delivered as its own message")]
pub struct InconsistentObservation {
    pub node: NodeId,
}

/// Resolves the set of transmitters of one slot.
pub fn resolve_slot(transmitters: &[NodeId]) -> SlotOutcome {
    match transmitters {
        [] => SlotOutcome::Silence,
        [sender] => SlotOutcome::Success(*sender),
        _ => SlotOutcome::Collision,
    }
}

/// Derives what `node` observes given whether it transmitted and the outcome.
pub fn observe(
    node: NodeId,
    transmitted: bool,
    outcome: SlotOutcome,
) -> Result<Observation, InconsistentObservation> {
    match outcome {
        SlotOutcome::Success(sender) if sender == node => {
            if transmitted {
                Ok(Observation::OwnDelivery)
            } else {
                Err(InconsistentObservation { node })
            }
        }
        SlotOutcome::Success(sender) if !transmitted => Ok(Observation::ReceivedOther(sender)),
        _ => Ok(Observation::Nothing),
    }
}
