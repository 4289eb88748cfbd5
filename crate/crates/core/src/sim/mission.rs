//! One mission of the leader-follower protocol.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{distance_based, merge_and_split, nsga2_run, MergeSplitConfig, Nsga2Config};
use crate::error::Result;
use crate::model::{derive_assignment, Scenario, TaskId, TaskSpec, UavId};
use crate::objectives::{evaluate, shortfall_against, ObjectiveBreakdown};
use crate::problem::CoalitionProblem;
use crate::qiga::{self, QigaConfig};
use crate::rng::{derive_seed, rng_for};

use super::ReputationLedger;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Solver {
    Moqga(QigaConfig),
    Nsga2(Nsga2Config),
    Distance,
    MergeSplit(MergeSplitConfig),
}

impl Solver {
    pub const NAMES: [&'static str; 4] = ["moqga", "nsga2", "distance", "merge-split"];

    pub fn name(&self) -> &'static str {
        match self {
            Solver::Moqga(_) => "moqga",
            Solver::Nsga2(_) => "nsga2",
            Solver::Distance => "distance",
            Solver::MergeSplit(_) => "merge-split",
        }
    }

    /// Solver with default settings by its command-line name.
    pub fn by_name(name: &str) -> Option<Solver> {
        match name {
            "moqga" => Some(Solver::Moqga(QigaConfig::default())),
            "nsga2" => Some(Solver::Nsga2(Nsga2Config::default())),
            "distance" => Some(Solver::Distance),
            "merge-split" => Some(Solver::MergeSplit(MergeSplitConfig::default())),
            _ => None,
        }
    }
}

/// Behavior switches for mission settlement.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Per-mission failure probability that replaces the rate-derived one.
    pub failure_overrides: BTreeMap<UavId, f64>,
    /// Keep each solver's last-generation solutions for scatter output.
    pub record_scatter: bool,
}

/// Pair every task with its nearest free UAV.
///
/// Pairs are taken globally in order of distance (ties by UAV id, then task
/// id), so a UAV nearest to two tasks leads the closer one. Tasks left over
/// when UAVs run out are absent from the result.
pub fn detect_and_elect(scenario: &Scenario) -> Vec<(TaskId, UavId)> {
    let mut pairs: Vec<(f64, UavId, TaskId)> = scenario
        .tasks
        .iter()
        .flat_map(|t| {
            scenario
                .uavs
                .iter()
                .map(move |u| (u.position.distance(&t.position), u.id, t.id))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut leads = BTreeMap::new();
    let mut busy = BTreeSet::new();
    for (_, uav, task) in pairs {
        if leads.contains_key(&task) || busy.contains(&uav) {
            continue;
        }
        leads.insert(task, uav);
        busy.insert(uav);
    }
    leads.into_iter().collect()
}

/// Free UAVs inside the leader's call radius that carry some required resource.
pub fn candidate_pool(
    scenario: &Scenario,
    task: &TaskSpec,
    leader: UavId,
    committed: &BTreeSet<UavId>,
) -> Result<Vec<UavId>> {
    let origin = scenario.uav(leader)?.position;
    Ok(scenario
        .uavs
        .iter()
        .filter(|u| u.id != leader && !committed.contains(&u.id))
        .filter(|u| u.position.distance(&origin) <= scenario.call_radius)
        .filter(|u| u.covers_any(task))
        .map(|u| u.id)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub task_id: TaskId,
    pub cost: f64,
    pub neg_log_reliability: f64,
    pub reputation: f64,
    pub feasible: bool,
}

impl ScatterPoint {
    fn from_breakdown(task_id: TaskId, b: &ObjectiveBreakdown) -> Self {
        ScatterPoint {
            task_id,
            cost: b.cost,
            neg_log_reliability: -b.log_reliability,
            reputation: b.reputation,
            feasible: b.is_feasible(),
        }
    }
}

/// A leader's invitation list after optimizing over its candidates.
#[derive(Clone, Debug, PartialEq)]
pub struct Proposal {
    pub task_id: TaskId,
    pub leader: UavId,
    pub invited: Vec<UavId>,
    pub breakdown: ObjectiveBreakdown,
    pub scatter: Vec<ScatterPoint>,
}

/// Choose followers for `leader` from the free UAVs around it.
///
/// `fixed` followers are already committed to this leader and stay in the
/// coalition. `seed` drives the evolutionary solvers.
#[allow(clippy::too_many_arguments)]
pub fn form_coalition(
    scenario: &Scenario,
    task: &TaskSpec,
    leader: UavId,
    fixed: &[UavId],
    committed: &BTreeSet<UavId>,
    ledger: &ReputationLedger,
    solver: &Solver,
    seed: u64,
    record_scatter: bool,
) -> Result<Proposal> {
    let pool = candidate_pool(scenario, task, leader, committed)?;
    let mut problem = CoalitionProblem::new(scenario, task, ledger, leader, fixed, pool);
    let mut scatter = Vec::new();
    let invited = if problem.candidates().is_empty() {
        Vec::new()
    } else {
        match solver {
            Solver::Moqga(cfg) => {
                let cfg = QigaConfig { rng_seed: seed, ..cfg.clone() };
                let res = qiga::run(&mut problem, &cfg)?;
                if record_scatter {
                    scatter = res
                        .final_population
                        .iter()
                        .map(|(_, b)| ScatterPoint::from_breakdown(task.id, b))
                        .collect();
                }
                problem.selected(&res.best_bits)
            }
            Solver::Nsga2(cfg) => {
                let cfg = Nsga2Config { rng_seed: seed, ..cfg.clone() };
                let res = nsga2_run(&mut problem, &cfg)?;
                if record_scatter {
                    scatter = res
                        .final_population
                        .iter()
                        .map(|(_, b)| ScatterPoint::from_breakdown(task.id, b))
                        .collect();
                }
                problem.selected(&res.best_bits)
            }
            Solver::Distance | Solver::MergeSplit(_) => {
                distance_based(scenario, task, leader, fixed, problem.candidates())?
            }
        }
    };
    let mut members = vec![leader];
    members.extend(fixed);
    members.extend(&invited);
    let breakdown = problem.evaluate_members(&members)?;
    if record_scatter && scatter.is_empty() {
        scatter.push(ScatterPoint::from_breakdown(task.id, &breakdown));
    }
    Ok(Proposal {
        task_id: task.id,
        leader,
        invited,
        breakdown,
        scatter,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    pub leader: UavId,
    pub task_id: TaskId,
    pub candidate: UavId,
    /// `rho - delta * travel_time`.
    pub utility: f64,
    pub pledged: Vec<f64>,
}

pub fn make_bids(
    proposals: &[Proposal],
    scenario: &Scenario,
    ledger: &ReputationLedger,
) -> Result<Vec<Bid>> {
    let mut bids = Vec::new();
    for p in proposals {
        let task = scenario.task(p.task_id)?;
        for &c in &p.invited {
            let uav = scenario.uav(c)?;
            bids.push(Bid {
                leader: p.leader,
                task_id: p.task_id,
                candidate: c,
                utility: ledger.get(c)? - scenario.weights.delta * uav.travel_time(&task.position),
                pledged: uav.resources.clone(),
            });
        }
    }
    Ok(bids)
}

/// Each invited UAV accepts its highest-utility bid; ties go to the lower
/// task id.
pub fn resolve_bids(bids: &[Bid]) -> BTreeMap<UavId, TaskId> {
    let mut best: BTreeMap<UavId, (f64, TaskId)> = BTreeMap::new();
    for b in bids {
        let entry = best.entry(b.candidate).or_insert((b.utility, b.task_id));
        if b.utility > entry.0 || (b.utility == entry.0 && b.task_id < entry.1) {
            *entry = (b.utility, b.task_id);
        }
    }
    best.into_iter().map(|(uav, (_, task))| (uav, task)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Commitment {
    pub task_id: TaskId,
    pub leader: Option<UavId>,
    pub followers: Vec<UavId>,
}

impl Commitment {
    pub fn members(&self) -> Vec<UavId> {
        self.leader.iter().chain(&self.followers).copied().collect()
    }
}

pub struct Formation {
    pub commitments: Vec<Commitment>,
    pub scatter: Vec<ScatterPoint>,
    pub rounds: usize,
}

fn pledged_satisfied(scenario: &Scenario, task: &TaskSpec, members: &[UavId]) -> Result<bool> {
    let assign = derive_assignment(scenario, task, members)?;
    let supplied = assign.supplied(scenario.n_resources());
    Ok(shortfall_against(&task.required, &supplied).iter().all(|s| *s == 0.0))
}

/// Leader election, solver calls and bid rounds for one mission.
///
/// Round 0 lets every leader optimize over all free UAVs. Later rounds
/// re-run leaders that lost an invitee or are still short on pledges, over
/// whatever UAVs remain free. At most one repair round per task is made.
pub fn form_coalitions(
    scenario: &Scenario,
    ledger: &ReputationLedger,
    solver: &Solver,
    mission_seed: u64,
    record_scatter: bool,
) -> Result<Formation> {
    let elected = detect_and_elect(scenario);
    let mut commitments: Vec<Commitment> = scenario
        .tasks
        .iter()
        .map(|t| Commitment {
            task_id: t.id,
            leader: None,
            followers: Vec::new(),
        })
        .collect();

    if let Solver::MergeSplit(cfg) = solver {
        let ids: Vec<UavId> = scenario.uavs.iter().map(|u| u.id).collect();
        let out = merge_and_split(scenario, ledger, &ids, cfg)?;
        let mut scatter = Vec::new();
        for tc in out.assignments {
            let task = scenario.task(tc.task_id)?;
            // The member closest to the task acts as its leader.
            let mut members = tc.members;
            let mut lead_idx = 0;
            for (i, id) in members.iter().enumerate() {
                let d = scenario.uav(*id)?.position.distance(&task.position);
                let best = scenario.uav(members[lead_idx])?.position.distance(&task.position);
                if d < best {
                    lead_idx = i;
                }
            }
            let leader = members.remove(lead_idx);
            if record_scatter {
                let mut all = vec![leader];
                all.extend(&members);
                let assign = derive_assignment(scenario, task, &all)?;
                let b = evaluate(&assign, task, ledger, &scenario.weights)?;
                scatter.push(ScatterPoint::from_breakdown(task.id, &b));
            }
            commitments[tc.task_id] = Commitment {
                task_id: tc.task_id,
                leader: Some(leader),
                followers: members,
            };
        }
        return Ok(Formation {
            commitments,
            scatter,
            rounds: 1,
        });
    }

    let mut committed: BTreeSet<UavId> = elected.iter().map(|(_, u)| *u).collect();
    for (task, leader) in &elected {
        commitments[*task].leader = Some(*leader);
    }
    let mut pending: Vec<TaskId> = elected.iter().map(|(t, _)| *t).collect();
    let mut last_pool: BTreeMap<TaskId, Vec<UavId>> = BTreeMap::new();
    let mut lost: BTreeSet<TaskId> = BTreeSet::new();
    let mut scatter = Vec::new();
    let mut rounds = 0;

    for round in 0..=scenario.tasks.len() {
        let mut jobs = Vec::new();
        for &task_id in &pending {
            let task = scenario.task(task_id)?;
            let leader = commitments[task_id].leader.expect("pending tasks are led");
            let pool = candidate_pool(scenario, task, leader, &committed)?;
            if pool.is_empty() {
                continue;
            }
            if !lost.contains(&task_id) && last_pool.get(&task_id) == Some(&pool) {
                continue;
            }
            last_pool.insert(task_id, pool);
            jobs.push((task, leader, &commitments[task_id].followers));
        }
        // Leaders optimize independently; only the bid resolution is serial.
        let mut proposals = jobs
            .into_par_iter()
            .map(|(task, leader, fixed)| {
                let seed = derive_seed(mission_seed, &[0x501, task.id as u64, round as u64]);
                form_coalition(
                    scenario,
                    task,
                    leader,
                    fixed,
                    &committed,
                    ledger,
                    solver,
                    seed,
                    record_scatter && round == 0,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        if proposals.is_empty() {
            break;
        }
        rounds += 1;

        let bids = make_bids(&proposals, scenario, ledger)?;
        let winners = resolve_bids(&bids);
        lost.clear();
        for p in &mut proposals {
            scatter.append(&mut p.scatter);
            for &c in &p.invited {
                if winners.get(&c) == Some(&p.task_id) {
                    commitments[p.task_id].followers.push(c);
                    committed.insert(c);
                } else {
                    lost.insert(p.task_id);
                }
            }
        }

        pending.clear();
        for (task_id, _) in &elected {
            let c = &commitments[*task_id];
            let short = !pledged_satisfied(scenario, scenario.task(*task_id)?, &c.members())?;
            if lost.contains(task_id) || short {
                pending.push(*task_id);
            }
        }
        if pending.is_empty() {
            break;
        }
    }

    Ok(Formation {
        commitments,
        scatter,
        rounds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub task_id: TaskId,
    pub leader: Option<UavId>,
    pub followers: Vec<UavId>,
    pub satisfied: bool,
    /// Summed unmet requirement on delivered resources.
    pub shortfall_total: f64,
    /// Number of resource types whose requirement was not met.
    pub violated_resources: usize,
    /// Evaluation of the pledged coalition against the mission-start ledger.
    pub breakdown: Option<ObjectiveBreakdown>,
    pub failed_members: Vec<UavId>,
    /// Resources each member actually handed over.
    pub delivered: BTreeMap<UavId, Vec<f64>>,
    pub reputation_delta: BTreeMap<UavId, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissionReport {
    pub mission: usize,
    pub tasks: Vec<TaskOutcome>,
    pub completed_fraction: f64,
    pub total_violations: usize,
    pub total_shortfall: f64,
    /// Ledger values after this mission's update.
    pub reputation: BTreeMap<UavId, f64>,
}

impl MissionReport {
    pub fn coalitions_disjoint(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.tasks
            .iter()
            .flat_map(|t| t.leader.iter().chain(&t.followers))
            .all(|id| seen.insert(*id))
    }
}

/// Probability that `uav` fails during `task`: `1 - exp(-sum_j lambda_j k_j)`
/// unless overridden.
pub fn failure_probability(
    scenario: &Scenario,
    task: TaskId,
    uav: UavId,
    overrides: &BTreeMap<UavId, f64>,
) -> Result<f64> {
    if let Some(p) = overrides.get(&uav) {
        return Ok(*p);
    }
    let u = scenario.uav(uav)?;
    let exposure: f64 = u
        .failure_rates
        .iter()
        .enumerate()
        .map(|(j, l)| l * scenario.execution_time(task, uav, j))
        .sum();
    Ok(1.0 - (-exposure).exp())
}

/// Reputation increments for one coalition from delivered amounts:
/// `delta_i = total_requirement * f_i / sum_m f_m` with
/// `f_i = sum_j delivered_ij / required_j` over required resources.
pub fn reputation_shares(required: &[f64], delivered: &[Vec<f64>]) -> Vec<f64> {
    let upsilon: f64 = required.iter().sum();
    let f: Vec<f64> = delivered
        .iter()
        .map(|row| {
            row.iter()
                .zip(required)
                .filter(|(_, t)| **t > 0.0)
                .map(|(r, t)| r / t)
                .sum()
        })
        .collect();
    let total: f64 = f.iter().sum();
    if total > 0.0 {
        f.iter().map(|fi| upsilon * fi / total).collect()
    } else {
        vec![0.0; f.len()]
    }
}

/// Deliver, sample failures, score the tasks and update the ledger.
pub fn settle_mission(
    mission: usize,
    commitments: &[Commitment],
    scenario: &Scenario,
    ledger: &mut ReputationLedger,
    config: &SimConfig,
) -> Result<MissionReport> {
    let snapshot = ledger.clone();
    let mut deltas = BTreeMap::new();
    let mut outcomes = Vec::with_capacity(commitments.len());

    for c in commitments {
        let task = scenario.task(c.task_id)?;
        let members = c.members();
        let breakdown = if c.leader.is_some() {
            let assign = derive_assignment(scenario, task, &members)?;
            Some(evaluate(&assign, task, &snapshot, &scenario.weights)?)
        } else {
            None
        };

        let mut failed = Vec::new();
        let mut delivered = Vec::with_capacity(members.len());
        for &id in &members {
            let uav = scenario.uav(id)?;
            let p = failure_probability(scenario, task.id, id, &config.failure_overrides)?;
            let mut rng = rng_for(scenario.seed, &[0xFA11, task.id as u64, id as u64]);
            if rng.random_bool(p.clamp(0.0, 1.0)) {
                failed.push(id);
                delivered.push(vec![0.0; uav.resources.len()]);
            } else {
                delivered.push(
                    uav.resources
                        .iter()
                        .map(|r| r * uav.contribution_fraction)
                        .collect(),
                );
            }
        }

        let mut supplied = vec![0.0; scenario.n_resources()];
        for row in &delivered {
            for ((s, r), mu) in supplied.iter_mut().zip(row).zip(&scenario.mu) {
                *s += mu * r;
            }
        }
        let shortfall = shortfall_against(&task.required, &supplied);
        let shortfall_total: f64 = shortfall.iter().sum();
        let violated_resources = shortfall.iter().filter(|s| **s > 0.0).count();

        let shares = reputation_shares(&task.required, &delivered);
        let delivered_by: BTreeMap<UavId, Vec<f64>> = members.iter().copied().zip(delivered).collect();
        let reputation_delta: BTreeMap<UavId, f64> = members.iter().copied().zip(shares).collect();
        deltas.extend(reputation_delta.iter().map(|(k, v)| (*k, *v)));

        outcomes.push(TaskOutcome {
            task_id: task.id,
            leader: c.leader,
            followers: c.followers.clone(),
            satisfied: shortfall_total == 0.0,
            shortfall_total,
            violated_resources,
            breakdown,
            failed_members: failed,
            delivered: delivered_by,
            reputation_delta,
        });
    }

    ledger.apply(mission, &deltas)?;

    let n = outcomes.len().max(1) as f64;
    Ok(MissionReport {
        mission,
        completed_fraction: outcomes.iter().filter(|o| o.satisfied).count() as f64 / n,
        total_violations: outcomes.iter().map(|o| o.violated_resources).sum(),
        total_shortfall: outcomes.iter().map(|o| o.shortfall_total).sum(),
        reputation: ledger.iter().collect(),
        tasks: outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ObjectiveWeights, Point, Uav};
    use crate::sim::ReputationMode;

    fn uav(id: UavId, x: f64, y: f64, resources: Vec<f64>) -> Uav {
        let n = resources.len();
        Uav {
            id,
            position: Point::new(x, y),
            resources,
            failure_rates: vec![0.0; n],
            speed: 1.0,
            selfish: false,
            contribution_fraction: 1.0,
        }
    }

    fn task(id: TaskId, x: f64, y: f64, required: Vec<f64>) -> TaskSpec {
        TaskSpec {
            id,
            position: Point::new(x, y),
            required,
        }
    }

    fn scenario(uavs: Vec<Uav>, tasks: Vec<TaskSpec>) -> Scenario {
        let n = tasks[0].required.len();
        Scenario {
            uavs,
            tasks,
            mu: vec![1.0; n],
            weights: ObjectiveWeights::default(),
            call_radius: 100.0,
            seed: 5,
        }
    }

    #[test]
    fn nearest_uav_leads() {
        let s = scenario(
            vec![uav(0, 5.0, 0.0, vec![1.0]), uav(1, 2.0, 0.0, vec![1.0])],
            vec![task(0, 0.0, 0.0, vec![1.0])],
        );
        assert_eq!(detect_and_elect(&s), vec![(0, 1)]);
    }

    #[test]
    fn shared_nearest_uav_leads_the_closer_task() {
        // UAV 0 is nearest to both tasks but closer to task 1.
        let s = scenario(
            vec![
                uav(0, 5.0, 0.0, vec![1.0]),
                uav(1, -4.0, 0.0, vec![1.0]),
                uav(2, 20.0, 0.0, vec![1.0]),
            ],
            vec![task(0, 1.0, 0.0, vec![1.0]), task(1, 7.0, 0.0, vec![1.0])],
        );
        assert_eq!(detect_and_elect(&s), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn no_tasks_no_leaders() {
        let mut s = scenario(vec![uav(0, 0.0, 0.0, vec![1.0])], vec![task(0, 0.0, 0.0, vec![1.0])]);
        s.tasks.clear();
        assert!(detect_and_elect(&s).is_empty());
    }

    #[test]
    fn surplus_tasks_stay_unled() {
        let s = scenario(
            vec![uav(0, 0.0, 0.0, vec![1.0])],
            vec![task(0, 1.0, 0.0, vec![1.0]), task(1, 2.0, 0.0, vec![1.0])],
        );
        assert_eq!(detect_and_elect(&s), vec![(0, 0)]);
    }

    #[test]
    fn pool_respects_radius_and_overlap() {
        let mut s = scenario(
            vec![
                uav(0, 0.0, 0.0, vec![1.0, 0.0]),
                uav(1, 50.0, 0.0, vec![1.0, 0.0]),
                uav(2, 5.0, 0.0, vec![0.0, 3.0]),
                uav(3, 6.0, 0.0, vec![2.0, 0.0]),
            ],
            vec![task(0, 0.0, 0.0, vec![1.0, 0.0])],
        );
        s.call_radius = 10.0;
        let pool = candidate_pool(&s, &s.tasks[0], 0, &BTreeSet::new()).unwrap();
        assert_eq!(pool, vec![3]);
        let pool = candidate_pool(&s, &s.tasks[0], 0, &BTreeSet::from([3])).unwrap();
        assert!(pool.is_empty());
    }

    #[test]
    fn isolated_leader_forms_alone() {
        let mut s = scenario(
            vec![uav(0, 0.0, 0.0, vec![1.0]), uav(1, 90.0, 0.0, vec![5.0])],
            vec![task(0, 0.0, 0.0, vec![4.0])],
        );
        s.call_radius = 10.0;
        let ledger = ReputationLedger::new(0..2, 0.0, ReputationMode::Cumulative);
        let solver = Solver::Moqga(QigaConfig {
            population_size: 10,
            max_iterations: 5,
            ..Default::default()
        });
        let f = form_coalitions(&s, &ledger, &solver, 1, false).unwrap();
        assert_eq!(f.commitments[0].leader, Some(0));
        assert!(f.commitments[0].followers.is_empty());
    }

    fn bid(task_id: TaskId, candidate: UavId, utility: f64) -> Bid {
        Bid {
            leader: 100 + task_id,
            task_id,
            candidate,
            utility,
            pledged: vec![],
        }
    }

    #[test]
    fn bids_go_to_the_shorter_trip() {
        // Same rho; travel 4 vs 10 with delta 0.1.
        let s = scenario(
            vec![uav(0, 0.0, 0.0, vec![1.0]), uav(1, 0.0, 0.0, vec![1.0]), uav(2, 0.0, 0.0, vec![1.0])],
            vec![task(0, 10.0, 0.0, vec![1.0]), task(1, 4.0, 0.0, vec![1.0])],
        );
        let ledger = ReputationLedger::new(0..3, 2.0, ReputationMode::Cumulative);
        let proposal = |task_id| Proposal {
            task_id,
            leader: task_id + 1,
            invited: vec![0],
            breakdown: ObjectiveBreakdown {
                cost: 0.0,
                log_reliability: 0.0,
                reputation: 0.0,
                objective: 0.0,
                penalty: 0.0,
                fitness: 0.0,
                shortfall: vec![],
            },
            scatter: vec![],
        };
        let bids = make_bids(&[proposal(0), proposal(1)], &s, &ledger).unwrap();
        assert!((bids[0].utility - (2.0 - 0.1 * 10.0)).abs() < 1e-9);
        assert!((bids[1].utility - (2.0 - 0.1 * 4.0)).abs() < 1e-9);
        assert_eq!(resolve_bids(&bids), BTreeMap::from([(0, 1)]));
    }

    #[test]
    fn single_bid_is_accepted_and_ties_go_low() {
        assert_eq!(resolve_bids(&[bid(3, 7, -5.0)]), BTreeMap::from([(7, 3)]));
        assert_eq!(
            resolve_bids(&[bid(2, 7, 1.0), bid(0, 7, 1.0), bid(1, 7, 1.0)]),
            BTreeMap::from([(7, 0)])
        );
    }

    #[test]
    fn lone_member_earns_the_full_requirement() {
        let d = reputation_shares(&[3.0, 2.0], &[vec![3.0, 2.0]]);
        assert!((d[0] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn equal_contributions_split_evenly() {
        let d = reputation_shares(&[4.0, 0.0], &[vec![2.0, 9.0], vec![2.0, 1.0]]);
        assert!((d[0] - 2.0).abs() < 1e-9 && (d[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn nobody_delivering_earns_nothing() {
        assert_eq!(reputation_shares(&[4.0], &[vec![0.0], vec![0.0]]), vec![0.0, 0.0]);
    }

    #[test]
    fn selfish_member_earns_less() {
        let mut s = scenario(
            vec![uav(0, 1.0, 0.0, vec![4.0, 4.0]), uav(1, 2.0, 0.0, vec![4.0, 4.0])],
            vec![task(0, 0.0, 0.0, vec![6.0, 6.0])],
        );
        s.uavs[1].selfish = true;
        s.uavs[1].contribution_fraction = 0.5;
        let mut ledger = ReputationLedger::new(0..2, 0.0, ReputationMode::Cumulative);
        let c = vec![Commitment {
            task_id: 0,
            leader: Some(0),
            followers: vec![1],
        }];
        let r = settle_mission(0, &c, &s, &mut ledger, &SimConfig::default()).unwrap();
        let d = &r.tasks[0].reputation_delta;
        assert!(d[&1] < d[&0]);
        assert!((d[&0] + d[&1] - 12.0).abs() < 1e-9);
        // 4 + 2 = 6 delivered per resource: exactly enough.
        assert!(r.tasks[0].satisfied);
        assert_eq!(ledger.get(1).unwrap(), d[&1]);
    }

    #[test]
    fn forced_failure_delivers_nothing() {
        let s = scenario(
            vec![uav(0, 1.0, 0.0, vec![4.0]), uav(1, 2.0, 0.0, vec![4.0])],
            vec![task(0, 0.0, 0.0, vec![6.0])],
        );
        let mut ledger = ReputationLedger::new(0..2, 0.0, ReputationMode::Cumulative);
        let cfg = SimConfig {
            failure_overrides: BTreeMap::from([(1, 1.0)]),
            ..Default::default()
        };
        let c = vec![Commitment {
            task_id: 0,
            leader: Some(0),
            followers: vec![1],
        }];
        let r = settle_mission(0, &c, &s, &mut ledger, &cfg).unwrap();
        let t = &r.tasks[0];
        assert_eq!(t.failed_members, vec![1]);
        assert!(!t.satisfied);
        assert_eq!(t.violated_resources, 1);
        assert!((t.shortfall_total - 2.0).abs() < 1e-9);
        assert_eq!(t.reputation_delta[&1], 0.0);
        assert!((t.reputation_delta[&0] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn unled_task_counts_as_failed() {
        let s = scenario(
            vec![uav(0, 1.0, 0.0, vec![4.0])],
            vec![task(0, 0.0, 0.0, vec![1.0]), task(1, 9.0, 0.0, vec![2.0])],
        );
        let mut ledger = ReputationLedger::new(0..1, 0.0, ReputationMode::Cumulative);
        let c = vec![
            Commitment { task_id: 0, leader: Some(0), followers: vec![] },
            Commitment { task_id: 1, leader: None, followers: vec![] },
        ];
        let r = settle_mission(0, &c, &s, &mut ledger, &SimConfig::default()).unwrap();
        assert!(r.tasks[0].satisfied);
        assert!(!r.tasks[1].satisfied);
        assert_eq!(r.completed_fraction, 0.5);
        assert!(r.tasks[1].breakdown.is_none());
    }

    #[test]
    fn failure_probability_follows_rates() {
        let mut s = scenario(vec![uav(0, 1.0, 0.0, vec![4.0, 1.0])], vec![task(0, 0.0, 0.0, vec![1.0, 1.0])]);
        s.uavs[0].failure_rates = vec![0.01, 0.02];
        let p = failure_probability(&s, 0, 0, &BTreeMap::new()).unwrap();
        let exposure = 0.01 * s.execution_time(0, 0, 0) + 0.02 * s.execution_time(0, 0, 1);
        assert!((p - (1.0 - (-exposure).exp())).abs() < 1e-12);
        assert_eq!(failure_probability(&s, 0, 0, &BTreeMap::from([(0, 0.9)])).unwrap(), 0.9);
    }
}
