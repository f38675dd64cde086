//! Deterministic random streams.
//!
//! Every trial gets a 64-bit seed derived from `(master seed, protocol, k,
//! trial index)`. Within a trial, node `i` draws from ChaCha stream `i + 1` of
//! that seed and the fast path uses stream 0, so streams never overlap and no
//! result depends on which thread ran the trial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::NodeId;
use crate::protocol::ProtocolKind;

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn absorb(acc: u64, word: u64) -> u64 {
    mix64(acc.wrapping_add(0x9e37_79b9_7f4a_7c15) ^ mix64(word))
}

pub fn trial_seed(master: u64, protocol: ProtocolKind, k: u64, trial_index: u64) -> u64 {
    [protocol.stream_tag(), k, trial_index]
        .into_iter()
        .fold(mix64(master), absorb)
}

/// The stream a single node draws from during a naive trial.
pub fn node_rng(trial_seed: u64, node: NodeId) -> SimRng {
    let mut rng = SimRng::seed_from_u64(trial_seed);
    rng.set_stream(node.0 as u64 + 1);
    rng
}

/// The stream used by the fast (aggregated) simulation path.
pub fn trial_rng(trial_seed: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(trial_seed);
    rng.set_stream(0);
    rng
}
