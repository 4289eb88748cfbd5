//! Coalition formation for heterogeneous, resource-constrained UAV fleets.
//!
//! A leader near each task searches for followers whose pooled resources
//! cover the task while keeping execution cost low, reliability high and
//! reputation high. The search runs a quantum-inspired genetic algorithm
//! over membership bitmaps; NSGA-II, nearest-first greedy and
//! merge-and-split are provided for comparison. [`sim`] runs whole
//! campaigns with a persistent reputation ledger.

pub mod baselines;
pub mod error;
pub mod model;
pub mod objectives;
pub mod presets;
pub mod problem;
pub mod qiga;
pub mod report;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use model::{
    derive_assignment, generate_scenario, CoalitionAssignment, GenerationConfig,
    ObjectiveWeights, Point, Scenario, TaskId, TaskSpec, Uav, UavId,
};
pub use objectives::{evaluate, ObjectiveBreakdown};
pub use problem::{BinaryProblem, CoalitionProblem, Evaluation, FnProblem, MultiObjective};
pub use qiga::{OptimizerResult, QigaConfig};
pub use baselines::{MergeSplitConfig, Nsga2Config};
pub use sim::{
    run_campaign, CampaignConfig, CampaignResult, CampaignSummary, MissionReport,
    ReputationLedger, ReputationMode, Solver,
};
