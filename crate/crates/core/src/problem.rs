//! Binary-string search problems shared by every optimizer.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{derive_assignment, Scenario, TaskSpec, UavId};
use crate::objectives::{evaluate, ObjectiveBreakdown};
use crate::sim::ReputationLedger;

/// Anything with a scalar fitness to maximize.
pub trait Evaluation: Clone {
    fn fitness(&self) -> f64;
}

/// An evaluation that also carries the minimization triple and a
/// constraint-violation measure.
pub trait MultiObjective: Evaluation {
    fn objectives(&self) -> [f64; 3];
    fn violation(&self) -> f64;
}

impl Evaluation for f64 {
    fn fitness(&self) -> f64 {
        *self
    }
}

impl Evaluation for ObjectiveBreakdown {
    fn fitness(&self) -> f64 {
        self.fitness
    }
}

impl MultiObjective for ObjectiveBreakdown {
    fn objectives(&self) -> [f64; 3] {
        ObjectiveBreakdown::objectives(self)
    }

    fn violation(&self) -> f64 {
        self.total_shortfall()
    }
}

pub trait BinaryProblem {
    type Eval: Evaluation;
    type Error;

    fn num_bits(&self) -> usize;
    fn evaluate(&mut self, bits: &[bool]) -> std::result::Result<Self::Eval, Self::Error>;
}

/// Adapts a closure into a [`BinaryProblem`].
pub struct FnProblem<F> {
    bits: usize,
    f: F,
}

impl<F> FnProblem<F> {
    pub fn new(bits: usize, f: F) -> Self {
        FnProblem { bits, f }
    }
}

impl<F, V, E> BinaryProblem for FnProblem<F>
where
    F: FnMut(&[bool]) -> std::result::Result<V, E>,
    V: Evaluation,
{
    type Eval = V;
    type Error = E;

    fn num_bits(&self) -> usize {
        self.bits
    }

    fn evaluate(&mut self, bits: &[bool]) -> std::result::Result<V, E> {
        (self.f)(bits)
    }
}

/// Membership search for one task: bit `i` selects `candidates[i]` as a
/// follower of `leader`. Members in `fixed` are always included.
pub struct CoalitionProblem<'a> {
    scenario: &'a Scenario,
    task: &'a TaskSpec,
    ledger: &'a ReputationLedger,
    base: Vec<UavId>,
    candidates: Vec<UavId>,
    cache: HashMap<Vec<bool>, ObjectiveBreakdown>,
}

impl<'a> CoalitionProblem<'a> {
    pub fn new(
        scenario: &'a Scenario,
        task: &'a TaskSpec,
        ledger: &'a ReputationLedger,
        leader: UavId,
        fixed: &[UavId],
        candidates: Vec<UavId>,
    ) -> Self {
        let mut base = vec![leader];
        base.extend(fixed.iter().copied().filter(|id| *id != leader));
        CoalitionProblem {
            scenario,
            task,
            ledger,
            base,
            candidates,
            cache: HashMap::new(),
        }
    }

    pub fn candidates(&self) -> &[UavId] {
        &self.candidates
    }

    pub fn members(&self, bits: &[bool]) -> Vec<UavId> {
        let mut members = self.base.clone();
        members.extend(
            self.candidates
                .iter()
                .zip(bits)
                .filter(|(_, b)| **b)
                .map(|(id, _)| *id),
        );
        members
    }

    pub fn selected(&self, bits: &[bool]) -> Vec<UavId> {
        self.candidates
            .iter()
            .zip(bits)
            .filter(|(_, b)| **b)
            .map(|(id, _)| *id)
            .collect()
    }

    pub fn evaluate_members(&self, members: &[UavId]) -> Result<ObjectiveBreakdown> {
        let assign = derive_assignment(self.scenario, self.task, members)?;
        evaluate(&assign, self.task, self.ledger, &self.scenario.weights)
    }

    /// Number of distinct bit strings evaluated so far.
    pub fn distinct_evaluations(&self) -> usize {
        self.cache.len()
    }
}

impl BinaryProblem for CoalitionProblem<'_> {
    type Eval = ObjectiveBreakdown;
    type Error = Error;

    fn num_bits(&self) -> usize {
        self.candidates.len()
    }

    fn evaluate(&mut self, bits: &[bool]) -> Result<ObjectiveBreakdown> {
        if bits.len() != self.candidates.len() {
            return Err(Error::LengthMismatch {
                expected: self.candidates.len(),
                found: bits.len(),
            });
        }
        if let Some(hit) = self.cache.get(bits) {
            return Ok(hit.clone());
        }
        let out = self.evaluate_members(&self.members(bits))?;
        self.cache.insert(bits.to_vec(), out.clone());
        Ok(out)
    }
}
