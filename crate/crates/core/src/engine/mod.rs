//! Trial execution: per-node simulation, the aggregated fast path, and
//! experiment campaigns.

mod experiment;
mod fast;
mod naive;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{InconsistentObservation, NodeId};
use crate::protocol::{ContractViolation, ParamError, ProtocolKind, ProtocolParams};

pub use experiment::{
    EntryFailure, ExperimentReport, aggregate, run_experiment, run_experiment_with_threads,
};
pub use fast::{run_ofa_fast, run_trial_fast, run_window_fast};
pub use naive::{NaiveTrial, SlotReport, TrialTrace, run_trial_naive, run_trial_traced};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Contract(#[from] ContractViolation),
    #[error(transparent)]
    Observation(#[from] InconsistentObservation),
    #[error("node {0} delivered twice")]
    DuplicateDelivery(NodeId),
    #[error("k must be at least 1")]
    NoContenders,
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("failed to start worker pool: {0}")]
    ThreadPool(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    Naive,
    #[default]
    Fast,
}

impl SimMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SimMode::Naive => "naive",
            SimMode::Fast => "fast",
        }
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimMode {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(SimMode::Naive),
            "fast" => Ok(SimMode::Fast),
            other => Err(ParamError::Invalid(format!(
                "unknown mode {other:?} (expected naive or fast)"
            ))),
        }
    }
}

/// One simulated run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub protocol: ProtocolKind,
    pub k: u64,
    pub seed: u64,
    pub run_index: u64,
    pub mode: SimMode,
    /// Slot (1-based) in which the last message was delivered.
    pub makespan_slots: u64,
}

impl TrialResult {
    pub fn ratio(&self) -> f64 {
        self.makespan_slots as f64 / self.k as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub protocol: ProtocolKind,
    pub k: u64,
    pub runs: u64,
    pub mean_steps: f64,
    pub mean_ratio: f64,
    /// Sample standard deviation of the makespan (zero for a single run).
    pub std_dev: f64,
}

impl AggregateStats {
    /// Summarises makespans of one `(protocol, k)` cell, in run order.
    pub fn from_makespans(protocol: ProtocolKind, k: u64, makespans: &[u64]) -> Self {
        let runs = makespans.len() as u64;
        let total: u128 = makespans.iter().map(|&m| m as u128).sum();
        let mean_steps = total as f64 / runs as f64;
        let std_dev = if runs > 1 {
            let ss: f64 = makespans
                .iter()
                .map(|&m| (m as f64 - mean_steps).powi(2))
                .sum();
            (ss / (runs - 1) as f64).sqrt()
        } else {
            0.0
        };
        AggregateStats {
            protocol,
            k,
            runs,
            mean_steps,
            mean_ratio: mean_steps / k as f64,
            std_dev,
        }
    }
}

/// Exact `Binomial(n, p)` draw.
pub fn sample_binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> Result<u64, ParamError> {
    let dist = Binomial::new(n, p).map_err(|_| ParamError::Probability { p })?;
    Ok(dist.sample(rng))
}

/// Runs one trial in the requested mode.
pub fn run_trial(
    params: &ProtocolParams,
    k: u64,
    seed: u64,
    mode: SimMode,
) -> Result<TrialResult, EngineError> {
    match mode {
        SimMode::Naive => run_trial_naive(params, k, seed),
        SimMode::Fast => run_trial_fast(params, k, seed),
    }
}
