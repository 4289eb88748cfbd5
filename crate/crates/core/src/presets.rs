//! Named experiment setups.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{GenerationConfig, UavId};
use crate::sim::{CampaignConfig, ReputationMode, Solver};

/// Campaign seeds every preset averages over.
pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPreset {
    pub name: String,
    pub description: String,
    pub generation: GenerationConfig,
    pub solvers: Vec<String>,
    pub missions: usize,
    pub seeds: Vec<u64>,
    pub reputation_mode: ReputationMode,
    pub selfish: BTreeMap<UavId, f64>,
    pub failure_overrides: BTreeMap<UavId, f64>,
}

impl ExperimentPreset {
    fn scale(n_uavs: usize, n_tasks: usize) -> Self {
        ExperimentPreset {
            name: format!("table2-{n_uavs}-{n_tasks}"),
            description: format!(
                "{n_uavs} UAVs, {n_tasks} tasks, every solver, completion and violations"
            ),
            generation: open_call(GenerationConfig::new(n_uavs, n_tasks)),
            solvers: Solver::NAMES.iter().map(|s| s.to_string()).collect(),
            missions: 30,
            seeds: DEFAULT_SEEDS.to_vec(),
            reputation_mode: ReputationMode::decay(),
            selfish: BTreeMap::new(),
            failure_overrides: BTreeMap::new(),
        }
    }

    /// Campaign settings for one solver and seed of this preset.
    pub fn campaign(&self, solver: Solver, seed: u64) -> CampaignConfig {
        CampaignConfig {
            reputation_mode: self.reputation_mode,
            selfish: self.selfish.clone(),
            failure_overrides: self.failure_overrides.clone(),
            ..CampaignConfig::new(self.generation.clone(), solver, self.missions, seed)
        }
    }
}

/// Every UAV carries every resource type in similar amounts, so reputation
/// is what separates them.
fn uniform_fleet(generation: GenerationConfig) -> GenerationConfig {
    GenerationConfig {
        resource_range: (8.0, 10.0),
        resource_presence: 1.0,
        ..generation
    }
}

/// Every UAV in the region hears a leader's call.
fn open_call(generation: GenerationConfig) -> GenerationConfig {
    GenerationConfig {
        call_radius: Some(generation.region_side * std::f64::consts::SQRT_2),
        ..generation
    }
}

pub fn all() -> Vec<ExperimentPreset> {
    let mut out: Vec<ExperimentPreset> = [(8, 2), (16, 4), (32, 8), (64, 16), (128, 24)]
        .into_iter()
        .map(|(n, k)| ExperimentPreset::scale(n, k))
        .collect();

    // UAVs 5 and 6 in one-based numbering.
    let pair = [4, 5];
    out.push(ExperimentPreset {
        name: "fig2-selfish".into(),
        description: "8 UAVs, 2 tasks, UAVs 5 and 6 deliver half of what they pledge".into(),
        solvers: vec!["moqga".into()],
        selfish: pair.iter().map(|id| (*id, 0.5)).collect(),
        generation: uniform_fleet(open_call(GenerationConfig::new(8, 2))),
        ..ExperimentPreset::scale(8, 2)
    });
    out.push(ExperimentPreset {
        name: "table3-unreliable".into(),
        description: "8 UAVs, 2 tasks, 10 missions, UAVs 5 and 6 fail 90% of the time".into(),
        solvers: vec!["moqga".into()],
        missions: 10,
        failure_overrides: pair.iter().map(|id| (*id, 0.9)).collect(),
        generation: uniform_fleet(open_call(GenerationConfig::new(8, 2))),
        ..ExperimentPreset::scale(8, 2)
    });
    out
}

pub fn find(name: &str) -> Option<ExperimentPreset> {
    all().into_iter().find(|p| p.name == name)
}
