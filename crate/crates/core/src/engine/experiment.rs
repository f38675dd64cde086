use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::protocol::{ProtocolKind, ProtocolParams};
use crate::rng::trial_seed;

use super::{AggregateStats, EngineError, SimMode, TrialResult, run_trial};

/// An entry that was skipped because its parameters were invalid.
#[derive(Clone, Debug, PartialEq)]
pub struct EntryFailure {
    pub entry_index: usize,
    pub protocol: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentReport {
    /// Trials in campaign order: entry, then k, then run index.
    pub trials: Vec<TrialResult>,
    pub aggregates: Vec<AggregateStats>,
    pub failures: Vec<EntryFailure>,
}

struct Job {
    params: ProtocolParams,
    k: u64,
    run_index: u64,
    seed: u64,
}

fn plan(config: &ExperimentConfig) -> (Vec<Job>, Vec<EntryFailure>) {
    let mut jobs = Vec::new();
    let mut failures = Vec::new();
    for (entry_index, entry) in config.entries.iter().enumerate() {
        let valid = match entry.validate() {
            Ok(v) => v,
            Err(e) => {
                failures.push(EntryFailure {
                    entry_index,
                    protocol: entry.protocol.clone(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        for &k in &valid.k_values {
            for run_index in 0..valid.runs {
                jobs.push(Job {
                    params: valid.params,
                    k,
                    run_index,
                    seed: trial_seed(config.master_seed, valid.params.kind(), k, run_index),
                });
            }
        }
    }
    (jobs, failures)
}

fn execute(jobs: &[Job], mode: SimMode) -> Result<Vec<TrialResult>, EngineError> {
    jobs.par_iter()
        .map(|job| {
            let mut r = run_trial(&job.params, job.k, job.seed, mode)?;
            r.run_index = job.run_index;
            Ok(r)
        })
        .collect()
}

/// Runs every trial of the campaign on the current rayon pool.
///
/// Entries with invalid parameters are reported in `failures`; the rest still run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, EngineError> {
    let (jobs, failures) = plan(config);
    let trials = execute(&jobs, config.mode)?;
    let aggregates = aggregate(&trials);
    Ok(ExperimentReport {
        trials,
        aggregates,
        failures,
    })
}

/// Like [`run_experiment`], on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentReport, EngineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| EngineError::ThreadPool(e.to_string()))?;
    pool.install(|| run_experiment(config))
}

/// Groups trials by `(protocol, k)` in order of first appearance, each group
/// summarised in run-index order.
pub fn aggregate(trials: &[TrialResult]) -> Vec<AggregateStats> {
    let mut keys: Vec<(ProtocolKind, u64)> = Vec::new();
    let mut groups: Vec<Vec<(u64, u64)>> = Vec::new();
    for t in trials {
        let key = (t.protocol, t.k);
        let slot = match keys.iter().position(|&x| x == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                groups.push(Vec::new());
                keys.len() - 1
            }
        };
        groups[slot].push((t.run_index, t.makespan_slots));
    }
    keys.into_iter()
        .zip(groups)
        .map(|((protocol, k), mut runs)| {
            runs.sort_unstable();
            let makespans: Vec<u64> = runs.into_iter().map(|(_, m)| m).collect();
            AggregateStats::from_makespans(protocol, k, &makespans)
        })
        .collect()
}
