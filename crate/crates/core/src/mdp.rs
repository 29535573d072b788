//! Agent view of the network: discrete state variables and the power grid.
//!
//! Each FBS observes four variables:
//! - `fue_ok`: its FUE meets the SINR threshold,
//! - `mue_ok`: the MUE meets its SINR threshold,
//! - `mue_ring`: ring of the FBS around the MUE (`0..=N1`),
//! - `mbs_ring`: ring of the FBS around the MBS (`0..=N2`).
//!
//! A [`StateModel`] selects which of them enter the tabular state index.

use alloc::vec::Vec;

use crate::channel::dbm_to_watts;
use crate::error::{invalid, Result};
use crate::math;
use crate::topology::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StateModel {
    /// FUE status plus both rings.
    #[default]
    #[cfg_attr(feature = "serde", serde(rename = "x1"))]
    FueStatus,
    /// MUE status plus both rings.
    #[cfg_attr(feature = "serde", serde(rename = "x2"))]
    MueStatus,
    /// Both status bits plus both rings.
    #[cfg_attr(feature = "serde", serde(rename = "full"))]
    Full,
}

impl StateModel {
    pub fn name(&self) -> &'static str {
        match self {
            StateModel::FueStatus => "x1",
            StateModel::MueStatus => "x2",
            StateModel::Full => "full",
        }
    }

    /// Number of binary status variables in the model.
    pub fn status_bits(&self) -> u32 {
        match self {
            StateModel::FueStatus | StateModel::MueStatus => 1,
            StateModel::Full => 2,
        }
    }
}

/// Raw observation of one FBS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AgentState {
    pub fue_ok: bool,
    pub mue_ok: bool,
    pub mue_ring: usize,
    pub mbs_ring: usize,
    pub model: StateModel,
}

/// Observes the state of FBS `k` from the current SINRs.
///
/// Thresholds are inclusive.
pub fn observe_state(
    k: usize,
    gamma_k: f64,
    gamma_0: f64,
    scenario: &Scenario,
    model: StateModel,
) -> AgentState {
    AgentState {
        fue_ok: gamma_k >= scenario.config.gammak(),
        mue_ok: gamma_0 >= scenario.config.gamma0(),
        mue_ring: scenario.mue_ring(k),
        mbs_ring: scenario.mbs_ring(k),
        model,
    }
}

pub fn state_space_size(model: StateModel, n1: usize, n2: usize) -> usize {
    (1usize << model.status_bits()) * (n1 + 1) * (n2 + 1)
}

/// Bijection between observations and Q-table rows for one model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateSpace {
    pub model: StateModel,
    /// Number of rings around the MUE.
    pub n1: usize,
    /// Number of rings around the MBS.
    pub n2: usize,
}

impl StateSpace {
    pub fn new(model: StateModel, n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return invalid("ring counts must be at least 1");
        }
        Ok(Self { model, n1, n2 })
    }

    pub fn for_scenario(model: StateModel, scenario: &Scenario) -> Result<Self> {
        Self::new(
            model,
            scenario.config.ring_radii_mue_m.len(),
            scenario.config.ring_radii_mbs_m.len(),
        )
    }

    pub fn len(&self) -> usize {
        state_space_size(self.model, self.n1, self.n2)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn status_code(&self, s: &AgentState) -> usize {
        match self.model {
            StateModel::FueStatus => s.fue_ok as usize,
            StateModel::MueStatus => s.mue_ok as usize,
            StateModel::Full => s.fue_ok as usize | (s.mue_ok as usize) << 1,
        }
    }

    /// Row index of an observation; variables outside the model are ignored.
    pub fn index(&self, s: &AgentState) -> usize {
        debug_assert!(s.mue_ring <= self.n1 && s.mbs_ring <= self.n2);
        (self.status_code(s) * (self.n1 + 1) + s.mue_ring) * (self.n2 + 1) + s.mbs_ring
    }

    /// Inverse of [`StateSpace::index`]; unused variables come back `false`.
    pub fn state(&self, index: usize) -> Result<AgentState> {
        if index >= self.len() {
            return invalid("state index out of range");
        }
        let mbs_ring = index % (self.n2 + 1);
        let rest = index / (self.n2 + 1);
        let mue_ring = rest % (self.n1 + 1);
        let code = rest / (self.n1 + 1);
        let (fue_ok, mue_ok) = match self.model {
            StateModel::FueStatus => (code == 1, false),
            StateModel::MueStatus => (false, code == 1),
            StateModel::Full => (code & 1 == 1, code & 2 == 2),
        };
        Ok(AgentState {
            fue_ok,
            mue_ok,
            mue_ring,
            mbs_ring,
            model: self.model,
        })
    }

    /// Rows an agent at fixed rings can visit; the status bits vary.
    pub fn reachable_rows(&self) -> usize {
        1 << self.model.status_bits()
    }
}

/// Transmit power levels of an FBS, lowest first.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ActionSet {
    levels_dbm: Vec<f64>,
    levels_watts: Vec<f64>,
}

/// Grid from `pmin_dbm` to `pmax_dbm` in `step_db` increments.
pub fn action_set(pmin_dbm: f64, pmax_dbm: f64, step_db: f64) -> Result<ActionSet> {
    if !pmin_dbm.is_finite() || !pmax_dbm.is_finite() || pmin_dbm > pmax_dbm {
        return invalid("power range must be finite with pmin <= pmax");
    }
    let span = pmax_dbm - pmin_dbm;
    let count = if span == 0.0 {
        0
    } else {
        if !(step_db > 0.0) {
            return invalid("power step must be positive");
        }
        let steps = span / step_db;
        let rounded = math::round(steps);
        if (steps - rounded).abs() > 1e-9 * steps.max(1.0) {
            return invalid("power step must divide the power range");
        }
        rounded as usize
    };
    let levels_dbm: Vec<f64> = (0..=count).map(|i| pmin_dbm + i as f64 * step_db).collect();
    let levels_watts = levels_dbm.iter().map(|d| dbm_to_watts(*d)).collect();
    Ok(ActionSet {
        levels_dbm,
        levels_watts,
    })
}

impl ActionSet {
    pub fn len(&self) -> usize {
        self.levels_watts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels_watts.is_empty()
    }

    pub fn watts(&self, a: usize) -> f64 {
        self.levels_watts[a]
    }

    pub fn dbm(&self, a: usize) -> f64 {
        self.levels_dbm[a]
    }

    pub fn levels_watts(&self) -> &[f64] {
        &self.levels_watts
    }

    pub fn max_index(&self) -> usize {
        self.len() - 1
    }

    pub fn max_watts(&self) -> f64 {
        self.levels_watts[self.max_index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_scenario, ScenarioConfig};

    #[test]
    fn space_sizes() {
        assert_eq!(state_space_size(StateModel::FueStatus, 3, 3), 32);
        assert_eq!(state_space_size(StateModel::MueStatus, 3, 3), 32);
        assert_eq!(state_space_size(StateModel::Full, 3, 3), 64);
        assert_eq!(state_space_size(StateModel::MueStatus, 1, 1), 8);
        assert!(StateSpace::new(StateModel::Full, 0, 3).is_err());
    }

    #[test]
    fn index_round_trip() {
        for model in [
            StateModel::FueStatus,
            StateModel::MueStatus,
            StateModel::Full,
        ] {
            let space = StateSpace::new(model, 3, 2).unwrap();
            let mut seen = alloc::vec![false; space.len()];
            for (i, slot) in seen.iter_mut().enumerate() {
                let s = space.state(i).unwrap();
                assert_eq!(space.index(&s), i);
                *slot = true;
            }
            assert!(seen.iter().all(|x| *x));
            assert!(space.state(space.len()).is_err());
        }
    }

    #[test]
    fn unused_bits_are_ignored() {
        let space = StateSpace::new(StateModel::FueStatus, 3, 3).unwrap();
        let a = AgentState {
            fue_ok: true,
            mue_ok: false,
            mue_ring: 1,
            mbs_ring: 2,
            model: space.model,
        };
        let b = AgentState { mue_ok: true, ..a };
        assert_eq!(space.index(&a), space.index(&b));
        let c = AgentState { fue_ok: false, ..a };
        assert_ne!(space.index(&a), space.index(&c));
    }

    #[test]
    fn observation_thresholds_are_inclusive() {
        let cfg = ScenarioConfig::default();
        let s = build_scenario(&cfg, 1).unwrap();
        let st = observe_state(1, cfg.gammak(), 0.0, &s, StateModel::Full);
        assert!(st.fue_ok);
        assert!(!st.mue_ok);
        let st = observe_state(
            1,
            cfg.gammak() * (1.0 - 1e-12),
            cfg.gamma0(),
            &s,
            StateModel::Full,
        );
        assert!(!st.fue_ok);
        assert!(st.mue_ok);
    }

    #[test]
    fn ring_at_twenty_metres() {
        let cfg = ScenarioConfig::default();
        // corner apartments sit sqrt(20^2 + 10^2) = 22.36 m from the MUE
        let mut s = build_scenario(&cfg, 1).unwrap();
        s.fbs[0] = crate::topology::Point::new(s.mue.x + 20.0, s.mue.y);
        assert_eq!(
            observe_state(1, 1.0, 1.0, &s, StateModel::FueStatus).mue_ring,
            1
        );
    }

    #[test]
    fn power_grid() {
        let a = action_set(5.0, 15.0, 1.0).unwrap();
        assert_eq!(a.len(), 11);
        assert!((a.watts(0) - 3.162_277_660e-3).abs() < 1e-12);
        assert!((a.max_watts() - 31.622_776_60e-3).abs() < 1e-11);
        assert!(a.levels_watts().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(action_set(5.0, 5.0, 1.0).unwrap().len(), 1);
        assert_eq!(action_set(5.0, 15.0, 2.0).unwrap().len(), 6);
        assert!(action_set(5.0, 15.0, 3.0).is_err());
        assert!(action_set(15.0, 5.0, 1.0).is_err());
    }
}
