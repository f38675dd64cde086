//! Fits the additive constant of the One-fail Adaptive makespan bound on a
//! calibration campaign whose seed is disjoint from the acceptance runs.
//!
//!     cargo run --release --example calibrate_ofa_constant

use contention::analysis::fit_additive_constant;
use contention::config::{EntryConfig, ExperimentConfig};
use contention::engine::{SimMode, run_experiment};

const CALIBRATION_SEED: u64 = 0xCA11_B8A7E;

fn main() {
    let config = ExperimentConfig {
        entries: vec![EntryConfig {
            protocol: "ofa".into(),
            k_values: vec![100, 1_000, 10_000],
            runs: 400,
            delta: Some(2.72),
            r: None,
        }],
        master_seed: CALIBRATION_SEED,
        mode: SimMode::Fast,
        output: None,
    };
    let report = run_experiment(&config).expect("calibration campaign");
    for k in [100u64, 1_000, 10_000] {
        let samples: Vec<(u64, u64)> = report
            .trials
            .iter()
            .filter(|t| t.k == k)
            .map(|t| (t.k, t.makespan_slots))
            .collect();
        println!("k={k:>6}  C={:.2}", fit_additive_constant(2.72, &samples));
    }
    let all: Vec<(u64, u64)> = report.trials.iter().map(|t| (t.k, t.makespan_slots)).collect();
    println!("global C={:.2}", fit_additive_constant(2.72, &all));
}
