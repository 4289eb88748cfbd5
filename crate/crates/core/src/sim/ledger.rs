use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::UavId;

/// How a coalition member's reputation evolves across missions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ReputationMode {
    /// `rho += delta` for coalition members.
    #[default]
    Cumulative,
    /// `rho = kappa * rho + delta` for coalition members.
    Decay { kappa: f64 },
}

impl ReputationMode {
    pub const DEFAULT_KAPPA: f64 = 0.95;

    pub fn decay() -> Self {
        ReputationMode::Decay {
            kappa: Self::DEFAULT_KAPPA,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReputationRecord {
    pub mission: usize,
    pub uav_id: UavId,
    pub rho: f64,
}

/// Per-UAV cooperative reputation with its full history.
#[derive(Clone, Debug, PartialEq)]
pub struct ReputationLedger {
    rho: BTreeMap<UavId, f64>,
    mode: ReputationMode,
    history: Vec<ReputationRecord>,
}

impl ReputationLedger {
    pub fn new(ids: impl IntoIterator<Item = UavId>, rho0: f64, mode: ReputationMode) -> Self {
        ReputationLedger {
            rho: ids.into_iter().map(|id| (id, rho0)).collect(),
            mode,
            history: Vec::new(),
        }
    }

    pub fn from_values(values: impl IntoIterator<Item = (UavId, f64)>) -> Self {
        ReputationLedger {
            rho: values.into_iter().collect(),
            mode: ReputationMode::Cumulative,
            history: Vec::new(),
        }
    }

    pub fn mode(&self) -> ReputationMode {
        self.mode
    }

    pub fn get(&self, id: UavId) -> Result<f64> {
        self.rho.get(&id).copied().ok_or(Error::UnknownUav(id))
    }

    pub fn iter(&self) -> impl Iterator<Item = (UavId, f64)> + '_ {
        self.rho.iter().map(|(id, r)| (*id, *r))
    }

    pub fn history(&self) -> &[ReputationRecord] {
        &self.history
    }

    /// Apply one mission's increments. Every key of `deltas` is a coalition
    /// member (a zero increment still counts as membership); all other UAVs
    /// keep their value untouched. A snapshot of every UAV is appended to the
    /// history afterwards.
    pub fn apply(&mut self, mission: usize, deltas: &BTreeMap<UavId, f64>) -> Result<()> {
        for id in deltas.keys() {
            if !self.rho.contains_key(id) {
                return Err(Error::UnknownUav(*id));
            }
        }
        for (id, delta) in deltas {
            let rho = self.rho.get_mut(id).expect("checked above");
            *rho = match self.mode {
                ReputationMode::Cumulative => *rho + delta,
                ReputationMode::Decay { kappa } => kappa * *rho + delta,
            };
        }
        self.record(mission);
        Ok(())
    }

    pub fn record(&mut self, mission: usize) {
        self.history.extend(self.rho.iter().map(|(id, rho)| ReputationRecord {
            mission,
            uav_id: *id,
            rho: *rho,
        }));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_members_are_untouched() {
        let mut ledger = ReputationLedger::new(0..4, 0.5, ReputationMode::Cumulative);
        let deltas = BTreeMap::from([(1, 2.0), (3, 0.0)]);
        ledger.apply(0, &deltas).unwrap();
        assert_eq!(ledger.get(0).unwrap(), 0.5);
        assert_eq!(ledger.get(1).unwrap(), 2.5);
        assert_eq!(ledger.get(2).unwrap(), 0.5);
        assert_eq!(ledger.get(3).unwrap(), 0.5);
        assert_eq!(ledger.history().len(), 4);
    }

    #[test]
    fn decay_shrinks_members_only() {
        let mut ledger = ReputationLedger::new(0..2, 10.0, ReputationMode::Decay { kappa: 0.5 });
        ledger.apply(0, &BTreeMap::from([(0, 1.0)])).unwrap();
        assert_eq!(ledger.get(0).unwrap(), 6.0);
        assert_eq!(ledger.get(1).unwrap(), 10.0);
    }

    #[test]
    fn unknown_ids_are_errors() {
        let mut ledger = ReputationLedger::new(0..2, 0.0, ReputationMode::Cumulative);
        assert!(matches!(ledger.get(5), Err(Error::UnknownUav(5))));
        assert!(ledger.apply(0, &BTreeMap::from([(9, 1.0)])).is_err());
        assert_eq!(ledger.get(0).unwrap(), 0.0);
    }
}
