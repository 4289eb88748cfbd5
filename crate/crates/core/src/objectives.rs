//! Scalar evaluation of a candidate coalition.
//!
//! All functions here are pure. The objective to minimize is
//! `cost - eta1 * ln(reliability) - eta2 * reputation`; fitness is the
//! negated objective minus a linear shortfall penalty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CoalitionAssignment, ObjectiveWeights, TaskSpec, UavId};
use crate::sim::ReputationLedger;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub cost: f64,
    pub log_reliability: f64,
    pub reputation: f64,
    pub objective: f64,
    pub penalty: f64,
    pub fitness: f64,
    pub shortfall: Vec<f64>,
}

impl ObjectiveBreakdown {
    /// Minimization triple `(cost, -ln R, -P)`.
    pub fn objectives(&self) -> [f64; 3] {
        [self.cost, -self.log_reliability, -self.reputation]
    }

    pub fn total_shortfall(&self) -> f64 {
        self.shortfall.iter().sum()
    }

    pub fn is_feasible(&self) -> bool {
        self.shortfall.iter().all(|s| *s == 0.0)
    }
}

/// Coalition cost with travel counted once per (member, resource) pair.
pub fn coalition_cost(assign: &CoalitionAssignment) -> f64 {
    coalition_cost_with(assign, false)
}

pub fn coalition_cost_with(assign: &CoalitionAssignment, travel_once_per_member: bool) -> f64 {
    assign
        .exec_cost
        .iter()
        .zip(&assign.exec_time)
        .zip(&assign.travel_time)
        .map(|((e_row, k_row), a)| {
            let exec: f64 = e_row.iter().zip(k_row).map(|(e, k)| e * k).sum();
            let travel = if travel_once_per_member {
                *a
            } else {
                a * e_row.len() as f64
            };
            exec + travel
        })
        .sum()
}

/// `ln R = -sum_i sum_j lambda_ij * k_ij`.
pub fn log_reliability(assign: &CoalitionAssignment) -> f64 {
    let exposure: f64 = assign
        .failure_rates
        .iter()
        .zip(&assign.exec_time)
        .flat_map(|(l_row, k_row)| l_row.iter().zip(k_row).map(|(l, k)| l * k))
        .sum();
    -exposure
}

/// Per-resource unmet requirement, comparing against summed execution cost.
pub fn resource_shortfall(assign: &CoalitionAssignment, task: &TaskSpec) -> Result<Vec<f64>> {
    let n = task.required.len();
    if let Some(row) = assign.exec_cost.iter().find(|row| row.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: row.len(),
        });
    }
    Ok(shortfall_against(&task.required, &assign.supplied(n)))
}

pub(crate) fn shortfall_against(required: &[f64], supplied: &[f64]) -> Vec<f64> {
    required
        .iter()
        .zip(supplied)
        .map(|(t, s)| (t - s).max(0.0))
        .collect()
}

pub fn penalty(shortfall: &[f64], gamma: f64) -> f64 {
    gamma * shortfall.iter().sum::<f64>()
}

pub fn coalition_reputation(members: &[UavId], ledger: &ReputationLedger) -> Result<f64> {
    members.iter().map(|id| ledger.get(*id)).sum()
}

pub fn evaluate(
    assign: &CoalitionAssignment,
    task: &TaskSpec,
    ledger: &ReputationLedger,
    weights: &ObjectiveWeights,
) -> Result<ObjectiveBreakdown> {
    let cost = coalition_cost_with(assign, weights.travel_once_per_member);
    let log_reliability = log_reliability(assign);
    let reputation = coalition_reputation(&assign.member_ids, ledger)?;
    let shortfall = resource_shortfall(assign, task)?;
    let objective = cost - weights.eta1 * log_reliability - weights.eta2 * reputation;
    let penalty = penalty(&shortfall, weights.gamma);
    Ok(ObjectiveBreakdown {
        cost,
        log_reliability,
        reputation,
        objective,
        penalty,
        fitness: -(objective + penalty),
        shortfall,
    })
}
