//! Fixtures shared by the optimizer benchmarks.

use coalform_core::{generate_scenario, GenerationConfig, ReputationLedger, ReputationMode, Scenario};

/// A seeded scenario with a zeroed ledger.
pub fn fixture(n_uavs: usize, n_tasks: usize, seed: u64) -> (Scenario, ReputationLedger) {
    let scenario = generate_scenario(&GenerationConfig::new(n_uavs, n_tasks), seed)
        .expect("benchmark scale is valid");
    let ledger = ReputationLedger::new(0..n_uavs, 0.0, ReputationMode::Cumulative);
    (scenario, ledger)
}
