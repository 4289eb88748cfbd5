//! Agents, tasks, candidate coalitions and scenario generation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_for, unit_from, SimRng};

pub type UavId = usize;
pub type TaskId = usize;

/// Bounds of the per-resource execution time, in time units.
pub const EXEC_TIME_RANGE: (f64, f64) = (10.0, 20.0);
/// Bounds of generated per-resource failure rates (exclusive on both ends).
pub const FAILURE_RATE_RANGE: (f64, f64) = (5e-5, 1e-4);

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Uav {
    pub id: UavId,
    pub position: Point,
    pub resources: Vec<f64>,
    pub failure_rates: Vec<f64>,
    pub speed: f64,
    pub selfish: bool,
    /// Share of pledged resources actually delivered.
    #[serde(default = "one")]
    pub contribution_fraction: f64,
}

impl Uav {
    pub fn travel_time(&self, to: &Point) -> f64 {
        self.position.distance(to) / self.speed
    }

    /// True when the UAV carries some amount of a resource the task needs.
    pub fn covers_any(&self, task: &TaskSpec) -> bool {
        self.resources
            .iter()
            .zip(&task.required)
            .any(|(&r, &t)| r > 0.0 && t > 0.0)
    }

    pub fn validate(&self, n_resources: usize) -> Result<()> {
        if self.resources.len() != n_resources || self.failure_rates.len() != n_resources {
            return Err(Error::LengthMismatch {
                expected: n_resources,
                found: self.resources.len().min(self.failure_rates.len()),
            });
        }
        if self.resources.iter().chain(&self.failure_rates).any(|v| !(*v >= 0.0)) {
            return Err(Error::config(format!(
                "UAV {} has a negative resource or failure rate",
                self.id
            )));
        }
        if !(self.speed > 0.0) {
            return Err(Error::config(format!("UAV {} speed must be positive", self.id)));
        }
        if !(0.0..=1.0).contains(&self.contribution_fraction) {
            return Err(Error::config(format!(
                "UAV {} contribution fraction must lie in [0, 1]",
                self.id
            )));
        }
        if !self.selfish && self.contribution_fraction != 1.0 {
            return Err(Error::config(format!(
                "honest UAV {} must deliver its full pledge",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: TaskId,
    pub position: Point,
    pub required: Vec<f64>,
}

impl TaskSpec {
    /// Total requirement of the task, summed over resource types.
    pub fn total_requirement(&self) -> f64 {
        self.required.iter().sum()
    }

    pub fn validate(&self, n_resources: usize) -> Result<()> {
        if self.required.len() != n_resources {
            return Err(Error::LengthMismatch {
                expected: n_resources,
                found: self.required.len(),
            });
        }
        if self.required.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::config(format!("task {} has a negative requirement", self.id)));
        }
        if !self.required.iter().any(|v| *v > 0.0) {
            return Err(Error::config(format!("task {} requires nothing", self.id)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    /// Weight on the log-reliability term.
    pub eta1: f64,
    /// Weight on the coalition reputation term.
    pub eta2: f64,
    /// Penalty per unit of unmet requirement.
    pub gamma: f64,
    /// Travel-time weight in a follower's utility.
    pub delta: f64,
    /// Count travel time once per member instead of once per (member, resource).
    #[serde(default)]
    pub travel_once_per_member: bool,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights {
            eta1: 10.0,
            eta2: 1.0,
            gamma: 1_000_000.0,
            delta: 0.1,
            travel_once_per_member: false,
        }
    }
}

impl ObjectiveWeights {
    pub fn validate(&self) -> Result<()> {
        if [self.eta1, self.eta2, self.gamma, self.delta]
            .iter()
            .any(|w| !(*w >= 0.0))
        {
            return Err(Error::config("objective weights must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub uavs: Vec<Uav>,
    pub tasks: Vec<TaskSpec>,
    pub mu: Vec<f64>,
    pub weights: ObjectiveWeights,
    pub call_radius: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn n_resources(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu.is_empty() || self.mu.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::config("resource cost coefficients must be positive"));
        }
        if !(self.call_radius > 0.0) {
            return Err(Error::config("call radius must be positive"));
        }
        self.weights.validate()?;
        let n = self.n_resources();
        for (idx, uav) in self.uavs.iter().enumerate() {
            if uav.id != idx {
                return Err(Error::config(format!("UAV at index {idx} has id {}", uav.id)));
            }
            uav.validate(n)?;
        }
        for (idx, task) in self.tasks.iter().enumerate() {
            if task.id != idx {
                return Err(Error::config(format!("task at index {idx} has id {}", task.id)));
            }
            task.validate(n)?;
        }
        Ok(())
    }

    pub fn uav(&self, id: UavId) -> Result<&Uav> {
        self.uavs.get(id).ok_or(Error::UnknownUav(id))
    }

    pub fn task(&self, id: TaskId) -> Result<&TaskSpec> {
        self.tasks.get(id).ok_or(Error::UnknownTask(id))
    }

    /// Execution time of `resource` of `uav` on `task`.
    ///
    /// Drawn uniformly from [`EXEC_TIME_RANGE`] once per (scenario seed, task,
    /// UAV, resource); repeated lookups return the same value.
    pub fn execution_time(&self, task: TaskId, uav: UavId, resource: usize) -> f64 {
        let (lo, hi) = EXEC_TIME_RANGE;
        lo + (hi - lo) * unit_from(self.seed, &[0xE7, task as u64, uav as u64, resource as u64])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }
}

/// A candidate coalition for one task with its per-member matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct CoalitionAssignment {
    pub task_id: TaskId,
    pub member_ids: Vec<UavId>,
    /// `exec_cost[i][j] = mu_j * r_ij`.
    pub exec_cost: Vec<Vec<f64>>,
    pub exec_time: Vec<Vec<f64>>,
    pub failure_rates: Vec<Vec<f64>>,
    pub travel_time: Vec<f64>,
}

impl CoalitionAssignment {
    pub fn empty(task_id: TaskId) -> Self {
        CoalitionAssignment {
            task_id,
            member_ids: Vec::new(),
            exec_cost: Vec::new(),
            exec_time: Vec::new(),
            failure_rates: Vec::new(),
            travel_time: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.member_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_ids.is_empty()
    }

    /// Column sums of the execution-cost matrix.
    pub fn supplied(&self, n_resources: usize) -> Vec<f64> {
        let mut total = vec![0.0; n_resources];
        for row in &self.exec_cost {
            for (t, e) in total.iter_mut().zip(row) {
                *t += e;
            }
        }
        total
    }
}

/// Assemble the cost, time and travel matrices for `members` serving `task`.
///
/// Member order is preserved; duplicate ids are rejected.
pub fn derive_assignment(
    scenario: &Scenario,
    task: &TaskSpec,
    members: &[UavId],
) -> Result<CoalitionAssignment> {
    let mut out = CoalitionAssignment::empty(task.id);
    for (pos, &id) in members.iter().enumerate() {
        if members[..pos].contains(&id) {
            return Err(Error::config(format!("UAV {id} listed twice in a coalition")));
        }
        let uav = scenario.uav(id)?;
        out.member_ids.push(id);
        out.exec_cost.push(
            scenario
                .mu
                .iter()
                .zip(&uav.resources)
                .map(|(mu, r)| mu * r)
                .collect(),
        );
        out.exec_time.push(
            (0..scenario.n_resources())
                .map(|j| scenario.execution_time(task.id, id, j))
                .collect(),
        );
        out.failure_rates.push(uav.failure_rates.clone());
        out.travel_time.push(uav.travel_time(&task.position));
    }
    Ok(out)
}

/// Parameters of a randomly generated scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub n_uavs: usize,
    pub n_tasks: usize,
    pub n_resources: usize,
    pub region_side: f64,
    pub resource_range: (f64, f64),
    pub requirement_range: (f64, f64),
    /// Probability that a UAV carries a given resource type at all.
    pub resource_presence: f64,
    pub speed: f64,
    pub mu: Option<Vec<f64>>,
    pub weights: ObjectiveWeights,
    /// Defaults to half the region diagonal.
    pub call_radius: Option<f64>,
}

impl GenerationConfig {
    pub fn new(n_uavs: usize, n_tasks: usize) -> Self {
        GenerationConfig {
            n_uavs,
            n_tasks,
            ..Default::default()
        }
    }

    pub fn call_radius(&self) -> f64 {
        self.call_radius
            .unwrap_or(self.region_side * std::f64::consts::SQRT_2 / 2.0)
    }

    pub fn mu(&self) -> Vec<f64> {
        self.mu.clone().unwrap_or_else(|| vec![1.0; self.n_resources])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_uavs == 0 || self.n_tasks == 0 || self.n_resources == 0 {
            return Err(Error::config(
                "UAV, task and resource counts must all be positive",
            ));
        }
        let ordered = |(lo, hi): (f64, f64)| lo >= 0.0 && hi >= lo && hi.is_finite();
        if !ordered(self.resource_range) || !ordered(self.requirement_range) {
            return Err(Error::config("value ranges must satisfy 0 <= lo <= hi"));
        }
        if self.requirement_range.1 <= 0.0 {
            return Err(Error::config("requirement range must allow positive values"));
        }
        if !(self.region_side > 0.0) || !(self.speed > 0.0) {
            return Err(Error::config("region side and speed must be positive"));
        }
        if !(0.0..=1.0).contains(&self.resource_presence) {
            return Err(Error::config("resource presence must be a probability"));
        }
        if let Some(mu) = &self.mu {
            if mu.len() != self.n_resources {
                return Err(Error::LengthMismatch {
                    expected: self.n_resources,
                    found: mu.len(),
                });
            }
        }
        self.weights.validate()
    }

    fn sample_point(&self, rng: &mut SimRng) -> Point {
        Point::new(
            rng.random_range(0.0..=self.region_side),
            rng.random_range(0.0..=self.region_side),
        )
    }

    pub fn generate_fleet(&self, rng: &mut SimRng) -> Vec<Uav> {
        let (lo, hi) = self.resource_range;
        (0..self.n_uavs)
            .map(|id| {
                let position = self.sample_point(rng);
                let amounts: Vec<f64> = (0..self.n_resources)
                    .map(|_| rng.random_range(lo..=hi))
                    .collect();
                let mut present: Vec<bool> = (0..self.n_resources)
                    .map(|_| rng.random_bool(self.resource_presence))
                    .collect();
                // Every UAV carries at least one resource type.
                if !present.contains(&true) {
                    present[rng.random_range(0..self.n_resources)] = true;
                }
                let resources = amounts
                    .iter()
                    .zip(&present)
                    .map(|(a, p)| if *p { *a } else { 0.0 })
                    .collect();
                let failure_rates = (0..self.n_resources)
                    .map(|_| sample_open(rng, FAILURE_RATE_RANGE))
                    .collect();
                Uav {
                    id,
                    position,
                    resources,
                    failure_rates,
                    speed: self.speed,
                    selfish: false,
                    contribution_fraction: 1.0,
                }
            })
            .collect()
    }

    pub fn generate_tasks(&self, rng: &mut SimRng) -> Vec<TaskSpec> {
        let (lo, hi) = self.requirement_range;
        (0..self.n_tasks)
            .map(|id| {
                let position = self.sample_point(rng);
                let mut required: Vec<f64> = (0..self.n_resources)
                    .map(|_| rng.random_range(lo..=hi))
                    .collect();
                if required.iter().all(|v| *v <= 0.0) {
                    let j = rng.random_range(0..self.n_resources);
                    required[j] = hi;
                }
                TaskSpec { id, position, required }
            })
            .collect()
    }
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            n_uavs: 8,
            n_tasks: 2,
            n_resources: 5,
            region_side: 100.0,
            resource_range: (1.0, 10.0),
            requirement_range: (5.0, 11.0),
            resource_presence: 0.8,
            speed: 1.0,
            mu: None,
            weights: ObjectiveWeights::default(),
            call_radius: None,
        }
    }
}

fn sample_open(rng: &mut SimRng, (lo, hi): (f64, f64)) -> f64 {
    loop {
        let v = rng.random_range(lo..hi);
        if v > lo {
            return v;
        }
    }
}

/// Generate a scenario: UAVs and tasks placed uniformly over the region.
pub fn generate_scenario(params: &GenerationConfig, seed: u64) -> Result<Scenario> {
    params.validate()?;
    let mut rng = rng_for(seed, &[0x5CE]);
    let uavs = params.generate_fleet(&mut rng);
    let tasks = params.generate_tasks(&mut rng);
    Ok(Scenario {
        uavs,
        tasks,
        mu: params.mu(),
        weights: params.weights,
        call_radius: params.call_radius(),
        seed,
    })
}
