//! Multi-mission campaigns with a persistent reputation ledger.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GenerationConfig, Scenario, Uav, UavId};
use crate::rng::{derive_seed, rng_for};

use super::mission::{form_coalitions, settle_mission, MissionReport, ScatterPoint, SimConfig, Solver};
use super::{ReputationLedger, ReputationMode, ReputationRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub generation: GenerationConfig,
    pub solver: Solver,
    pub missions: usize,
    pub seed: u64,
    pub reputation_mode: ReputationMode,
    pub rho0: f64,
    /// Selfish UAVs and the fraction of each pledged resource they deliver.
    #[serde(default)]
    pub selfish: BTreeMap<UavId, f64>,
    /// Per-mission failure probability for designated UAVs.
    #[serde(default)]
    pub failure_overrides: BTreeMap<UavId, f64>,
    /// Subtract delivered resources from each UAV's capacity after a mission.
    #[serde(default)]
    pub deplete_resources: bool,
    #[serde(default)]
    pub record_scatter: bool,
}

impl CampaignConfig {
    pub fn new(generation: GenerationConfig, solver: Solver, missions: usize, seed: u64) -> Self {
        CampaignConfig {
            generation,
            solver,
            missions,
            seed,
            reputation_mode: ReputationMode::Cumulative,
            rho0: 0.0,
            selfish: BTreeMap::new(),
            failure_overrides: BTreeMap::new(),
            deplete_resources: false,
            record_scatter: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.generation.validate()?;
        if self.missions == 0 {
            return Err(Error::config("a campaign needs at least one mission"));
        }
        let n = self.generation.n_uavs;
        for (id, v) in self.selfish.iter().chain(&self.failure_overrides) {
            if *id >= n {
                return Err(Error::UnknownUav(*id));
            }
            if !(0.0..=1.0).contains(v) {
                return Err(Error::config(format!("UAV {id}: value {v} is not in [0, 1]")));
            }
        }
        if let ReputationMode::Decay { kappa } = self.reputation_mode {
            if !(0.0..=1.0).contains(&kappa) {
                return Err(Error::config("decay factor must lie in [0, 1]"));
            }
        }
        match &self.solver {
            Solver::Moqga(c) => c.validate(),
            Solver::Nsga2(c) => c.validate(),
            Solver::Distance | Solver::MergeSplit(_) => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub solver: String,
    pub n_uavs: usize,
    pub n_tasks: usize,
    pub missions: usize,
    pub completed_pct: f64,
    /// Violated resource types per mission, averaged over missions.
    pub mean_violations: f64,
}

impl CampaignSummary {
    pub fn from_reports(solver: &str, n_uavs: usize, n_tasks: usize, reports: &[MissionReport]) -> Self {
        let tasks: usize = reports.iter().map(|r| r.tasks.len()).sum();
        let done = reports
            .iter()
            .flat_map(|r| &r.tasks)
            .filter(|t| t.satisfied)
            .count();
        let violations: usize = reports.iter().map(|r| r.total_violations).sum();
        CampaignSummary {
            solver: solver.to_string(),
            n_uavs,
            n_tasks,
            missions: reports.len(),
            completed_pct: 100.0 * done as f64 / tasks.max(1) as f64,
            mean_violations: violations as f64 / reports.len().max(1) as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissionScatter {
    pub mission: usize,
    #[serde(flatten)]
    pub point: ScatterPoint,
}

#[derive(Clone, Debug)]
pub struct CampaignResult {
    pub reports: Vec<MissionReport>,
    pub summary: CampaignSummary,
    pub reputation: Vec<ReputationRecord>,
    pub scatter: Vec<MissionScatter>,
}

impl CampaignResult {
    /// Fraction of missions in `range` (0-based, half-open) where `uav` was
    /// picked as a follower.
    pub fn follower_frequency(&self, uav: UavId, range: std::ops::Range<usize>) -> f64 {
        let picked = self.reports[range.clone()]
            .iter()
            .filter(|r| r.tasks.iter().any(|t| t.followers.contains(&uav)))
            .count();
        picked as f64 / range.len().max(1) as f64
    }

    /// Follower slots held by `uavs` over all follower slots.
    pub fn follower_share(&self, uavs: &[UavId]) -> f64 {
        let (mut hit, mut all) = (0usize, 0usize);
        for t in self.reports.iter().flat_map(|r| &r.tasks) {
            all += t.followers.len();
            hit += t.followers.iter().filter(|f| uavs.contains(f)).count();
        }
        hit as f64 / all.max(1) as f64
    }
}

/// The fleet shared by every mission of a campaign.
pub fn campaign_fleet(config: &CampaignConfig) -> Vec<Uav> {
    let mut rng = rng_for(config.seed, &[0xF1EE7]);
    let mut fleet = config.generation.generate_fleet(&mut rng);
    apply_selfish(config, &mut fleet);
    fleet
}

/// Mission `mission`'s scenario: the fleet repositioned over the region and
/// a fresh set of tasks.
pub fn mission_scenario(config: &CampaignConfig, fleet: &[Uav], mission: usize) -> Scenario {
    let params = &config.generation;
    let mut rng = rng_for(config.seed, &[0x7A5C, mission as u64]);
    let placed = params.generate_fleet(&mut rng);
    let uavs = fleet
        .iter()
        .zip(placed)
        .map(|(u, p)| Uav {
            position: p.position,
            ..u.clone()
        })
        .collect();
    Scenario {
        uavs,
        tasks: params.generate_tasks(&mut rng),
        mu: params.mu(),
        weights: params.weights.clone(),
        call_radius: params.call_radius(),
        seed: derive_seed(config.seed, &[0x5EED, mission as u64]),
    }
}

pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignResult> {
    run_campaign_with(config, |_| {})
}

/// [`run_campaign`] with a callback after every finished mission.
pub fn run_campaign_with(
    config: &CampaignConfig,
    on_mission: impl FnMut(&MissionReport),
) -> Result<CampaignResult> {
    config.validate()?;
    let fleet = campaign_fleet(config);
    drive(config, fleet, |fleet, mission| mission_scenario(config, fleet, mission), on_mission)
}

/// A campaign that replays `scenario`'s fleet and tasks in every mission.
///
/// Only the settlement draws change between missions. The fleet size, task
/// count and weights of `config.generation` are taken from the scenario.
pub fn run_fixed_campaign_with(
    config: &CampaignConfig,
    scenario: &Scenario,
    on_mission: impl FnMut(&MissionReport),
) -> Result<CampaignResult> {
    scenario.validate()?;
    let config = CampaignConfig {
        generation: GenerationConfig {
            n_uavs: scenario.uavs.len(),
            n_tasks: scenario.tasks.len(),
            n_resources: scenario.n_resources(),
            mu: Some(scenario.mu.clone()),
            weights: scenario.weights,
            call_radius: Some(scenario.call_radius),
            ..config.generation.clone()
        },
        ..config.clone()
    };
    config.validate()?;
    let mut fleet = scenario.uavs.clone();
    apply_selfish(&config, &mut fleet);
    drive(
        &config,
        fleet,
        |fleet, mission| Scenario {
            uavs: fleet.to_vec(),
            seed: derive_seed(config.seed, &[0x5EED, mission as u64]),
            ..scenario.clone()
        },
        on_mission,
    )
}

fn apply_selfish(config: &CampaignConfig, fleet: &mut [Uav]) {
    for uav in fleet {
        if let Some(f) = config.selfish.get(&uav.id) {
            uav.selfish = true;
            uav.contribution_fraction = *f;
        }
    }
}

fn drive(
    config: &CampaignConfig,
    mut fleet: Vec<Uav>,
    scenario_for: impl Fn(&[Uav], usize) -> Scenario,
    mut on_mission: impl FnMut(&MissionReport),
) -> Result<CampaignResult> {
    let mut ledger = ReputationLedger::new(
        fleet.iter().map(|u| u.id),
        config.rho0,
        config.reputation_mode,
    );
    ledger.record(0);
    let sim = SimConfig {
        failure_overrides: config.failure_overrides.clone(),
        record_scatter: config.record_scatter,
    };
    let mut reports = Vec::with_capacity(config.missions);
    let mut scatter = Vec::new();

    for mission in 1..=config.missions {
        let scenario = scenario_for(&fleet, mission);
        let seed = derive_seed(config.seed, &[0x3155, mission as u64]);
        let formation = form_coalitions(&scenario, &ledger, &config.solver, seed, config.record_scatter)?;
        let report = settle_mission(mission, &formation.commitments, &scenario, &mut ledger, &sim)?;
        scatter.extend(
            formation
                .scatter
                .into_iter()
                .map(|point| MissionScatter { mission, point }),
        );
        if config.deplete_resources {
            for t in &report.tasks {
                for (id, delivered) in &t.delivered {
                    for (r, d) in fleet[*id].resources.iter_mut().zip(delivered) {
                        *r = (*r - d).max(0.0);
                    }
                }
            }
        }
        on_mission(&report);
        reports.push(report);
    }

    let summary = CampaignSummary::from_reports(
        config.solver.name(),
        config.generation.n_uavs,
        config.generation.n_tasks,
        &reports,
    );
    Ok(CampaignResult {
        reports,
        summary,
        reputation: ledger.history().to_vec(),
        scatter,
    })
}
