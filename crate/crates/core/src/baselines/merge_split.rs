//! Merge-and-split coalition formation over a partition of the whole fleet.
//!
//! Every coalition is attached to one task and valued by the same fitness
//! the evolutionary solvers use. Two coalitions on the same task merge when
//! the merged value beats the sum of the parts; a coalition splits in two
//! when the parts beat the whole. Passes repeat until nothing changes.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_assignment, Scenario, TaskId, UavId};
use crate::objectives::evaluate;
use crate::sim::ReputationLedger;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeSplitConfig {
    /// Coalitions up to this size try every bipartition; larger ones only
    /// try the halves of their id-ordered member list.
    pub exhaustive_split_limit: usize,
}

impl Default for MergeSplitConfig {
    fn default() -> Self {
        MergeSplitConfig {
            exhaustive_split_limit: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskCoalition {
    pub task_id: TaskId,
    pub members: Vec<UavId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeSplitOutcome {
    /// Final partition of every participating UAV.
    pub partition: Vec<TaskCoalition>,
    /// Highest-valued coalition per task, in task order; idle coalitions
    /// are left out.
    pub assignments: Vec<TaskCoalition>,
    pub merges: usize,
    pub splits: usize,
}

const IMPROVEMENT_EPS: f64 = 1e-9;

struct Valuer<'a> {
    scenario: &'a Scenario,
    ledger: &'a ReputationLedger,
    cache: HashMap<(TaskId, Vec<UavId>), f64>,
}

impl Valuer<'_> {
    fn value(&mut self, task_id: TaskId, members: &[UavId]) -> Result<f64> {
        let key = (task_id, members.to_vec());
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let task = self.scenario.task(task_id)?;
        let assign = derive_assignment(self.scenario, task, members)?;
        let v = evaluate(&assign, task, self.ledger, &self.scenario.weights)?.fitness;
        self.cache.insert(key, v);
        Ok(v)
    }

    fn improves(&self, new: f64, old: f64) -> bool {
        new > old + IMPROVEMENT_EPS * old.abs().max(1.0)
    }
}

/// Singletons, each attached to its nearest task (ties to the lower task id).
pub fn nearest_task_partition(scenario: &Scenario, uavs: &[UavId]) -> Result<Vec<TaskCoalition>> {
    let mut out = Vec::with_capacity(uavs.len());
    for &id in uavs {
        let uav = scenario.uav(id)?;
        let task = scenario
            .tasks
            .iter()
            .min_by(|a, b| {
                uav.position
                    .distance(&a.position)
                    .total_cmp(&uav.position.distance(&b.position))
                    .then(a.id.cmp(&b.id))
            })
            .ok_or_else(|| Error::config("merge-and-split needs at least one task"))?;
        out.push(TaskCoalition {
            task_id: task.id,
            members: vec![id],
        });
    }
    Ok(out)
}

pub fn merge_and_split(
    scenario: &Scenario,
    ledger: &ReputationLedger,
    uavs: &[UavId],
    config: &MergeSplitConfig,
) -> Result<MergeSplitOutcome> {
    let start = nearest_task_partition(scenario, uavs)?;
    merge_and_split_from(scenario, ledger, start, config)
}

/// Run merge and split passes to a fixed point from a given partition.
pub fn merge_and_split_from(
    scenario: &Scenario,
    ledger: &ReputationLedger,
    mut partition: Vec<TaskCoalition>,
    config: &MergeSplitConfig,
) -> Result<MergeSplitOutcome> {
    if scenario.tasks.is_empty() {
        return Err(Error::config("merge-and-split needs at least one task"));
    }
    let mut valuer = Valuer {
        scenario,
        ledger,
        cache: HashMap::new(),
    };
    for c in &mut partition {
        c.members.sort_unstable();
    }
    let (mut merges, mut splits) = (0, 0);
    loop {
        canonical_order(&mut partition);
        if try_merge(&mut valuer, &mut partition)? {
            merges += 1;
            continue;
        }
        if try_split(&mut valuer, &mut partition, config)? {
            splits += 1;
            continue;
        }
        break;
    }

    let mut assignments = Vec::new();
    for task in &scenario.tasks {
        let mut best: Option<(f64, &TaskCoalition)> = None;
        for c in partition.iter().filter(|c| c.task_id == task.id) {
            let v = valuer.value(c.task_id, &c.members)?;
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, c));
            }
        }
        if let Some((_, c)) = best {
            assignments.push(c.clone());
        }
    }
    Ok(MergeSplitOutcome {
        partition,
        assignments,
        merges,
        splits,
    })
}

fn canonical_order(partition: &mut [TaskCoalition]) {
    partition.sort_by(|a, b| a.task_id.cmp(&b.task_id).then(a.members.cmp(&b.members)));
}

fn try_merge(valuer: &mut Valuer<'_>, partition: &mut Vec<TaskCoalition>) -> Result<bool> {
    for i in 0..partition.len() {
        for j in (i + 1)..partition.len() {
            if partition[i].task_id != partition[j].task_id {
                continue;
            }
            let task = partition[i].task_id;
            let mut merged = partition[i].members.clone();
            merged.extend(&partition[j].members);
            merged.sort_unstable();
            let whole = valuer.value(task, &merged)?;
            let parts = valuer.value(task, &partition[i].members)? + valuer.value(task, &partition[j].members)?;
            if valuer.improves(whole, parts) {
                partition[i].members = merged;
                partition.remove(j);
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn try_split(
    valuer: &mut Valuer<'_>,
    partition: &mut Vec<TaskCoalition>,
    config: &MergeSplitConfig,
) -> Result<bool> {
    for i in 0..partition.len() {
        let members = partition[i].members.clone();
        let n = members.len();
        if n < 2 {
            continue;
        }
        let task = partition[i].task_id;
        let whole = valuer.value(task, &members)?;
        let masks: Vec<u64> = if n <= config.exhaustive_split_limit.min(63) {
            // Fix the first member on side A so each bipartition appears once.
            (1..(1u64 << (n - 1))).map(|m| m << 1).collect()
        } else {
            vec![((1u64 << (n - n / 2)) - 1) << (n / 2)]
        };
        for mask in masks {
            let (a, b): (Vec<(usize, UavId)>, Vec<(usize, UavId)>) = members
                .iter()
                .copied()
                .enumerate()
                .partition(|(k, _)| mask & (1 << k) == 0);
            let a: Vec<UavId> = a.into_iter().map(|(_, id)| id).collect();
            let b: Vec<UavId> = b.into_iter().map(|(_, id)| id).collect();
            let parts = valuer.value(task, &a)? + valuer.value(task, &b)?;
            if valuer.improves(parts, whole) {
                partition[i].members = a;
                partition.push(TaskCoalition { task_id: task, members: b });
                return Ok(true);
            }
        }
    }
    Ok(false)
}
