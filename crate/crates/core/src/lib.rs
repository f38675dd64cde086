//! Randomized contention resolution on a slotted multiple-access channel
//! without collision detection.
//!
//! The crate simulates static k-selection: `k` nodes are activated at once and
//! each must deliver one message over the shared channel. Three protocols are
//! provided (One-fail Adaptive, Exp Back-on/Back-off and a Loglog-iterated
//! Back-off baseline), together with an engine that runs trials either node by
//! node or through an exact aggregated fast path, and calculators for the
//! constants that bound the protocols' makespan.

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod config;
pub mod engine;
pub mod protocol;
pub mod report;
pub mod rng;

pub use channel::{NodeId, Observation, SlotOutcome, observe, resolve_slot};
pub use engine::{AggregateStats, SimMode, TrialResult};
pub use protocol::{ProtocolKind, ProtocolParams};
