//! Tabular Q-learning with per-cell visit counts.
//!
//! Every agent owns one [`QTable`]. Targets come either from the agent's
//! own table (independent learning) or from the summed rows of all agents
//! observing the same state (cooperative learning). All argmaxes break ties
//! toward the lowest action index.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::baselines::ExplicitMdp;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LearningMode {
    #[default]
    Independent,
    Cooperative,
}

impl LearningMode {
    pub fn name(&self) -> &'static str {
        match self {
            LearningMode::Independent => "il",
            LearningMode::Cooperative => "cl",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct LearningConfig {
    /// Discount factor.
    pub beta: f64,
    /// Exploration probability of the e-greedy policy.
    pub epsilon_explore: f64,
    pub mode: LearningMode,
    /// Training frames per joining FBS.
    pub training_frames: usize,
}

impl Default for LearningConfig {
    fn default() -> Self {
        Self {
            beta: 0.9,
            epsilon_explore: 0.1,
            mode: LearningMode::Independent,
            training_frames: 2000,
        }
    }
}

impl LearningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return invalid("discount must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon_explore) {
            return invalid("exploration probability must lie in [0, 1]");
        }
        Ok(())
    }
}

/// `1 / (1 + t)` where `t` counts earlier visits of the state-action pair.
#[inline]
pub fn learning_rate(visit_count: u64) -> f64 {
    1.0 / (1.0 + visit_count as f64)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QTable {
    states: usize,
    actions: usize,
    values: Vec<f64>,
    visits: Vec<u64>,
}

impl QTable {
    /// Zero-initialised table.
    pub fn new(states: usize, actions: usize) -> Self {
        assert!(
            states > 0 && actions > 0,
            "Q-table needs at least one state and one action"
        );
        Self {
            states,
            actions,
            values: vec![0.0; states * actions],
            visits: vec![0; states * actions],
        }
    }

    /// Table with given values and zero visits.
    pub fn from_values(states: usize, actions: usize, values: Vec<f64>) -> Result<Self> {
        if states == 0 || actions == 0 || values.len() != states * actions {
            return invalid("Q-table shape does not match its values");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("Q-values must be finite");
        }
        Ok(Self {
            states,
            actions,
            values,
            visits: vec![0; states * actions],
        })
    }

    pub fn from_parts(
        states: usize,
        actions: usize,
        values: Vec<f64>,
        visits: Vec<u64>,
    ) -> Result<Self> {
        let mut q = Self::from_values(states, actions, values)?;
        if visits.len() != states * actions {
            return invalid("visit counts do not match the Q-table shape");
        }
        q.visits = visits;
        Ok(q)
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    #[inline]
    pub fn value(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.actions + a]
    }

    #[inline]
    pub fn visits(&self, s: usize, a: usize) -> u64 {
        self.visits[s * self.actions + a]
    }

    #[inline]
    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.actions..(s + 1) * self.actions]
    }

    pub fn visit_row(&self, s: usize) -> &[u64] {
        &self.visits[s * self.actions..(s + 1) * self.actions]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    /// Greedy action and its value in state `s`.
    pub fn greedy(&self, s: usize) -> (usize, f64) {
        argmax(self.row(s))
    }

    /// Applies one local update and returns the learning rate used.
    ///
    /// `Q(s,a) += α (reward + β target - Q(s,a))` with `α` taken from the
    /// visit count before it is incremented.
    pub fn update(&mut self, s: usize, a: usize, reward: f64, target: f64, beta: f64) -> f64 {
        let i = s * self.actions + a;
        let alpha = learning_rate(self.visits[i]);
        self.values[i] += alpha * (reward + beta * target - self.values[i]);
        self.visits[i] += 1;
        alpha
    }
}

/// Index and value of the maximum, lowest index on ties.
pub fn argmax(row: &[f64]) -> (usize, f64) {
    let mut best = (0, row[0]);
    for (a, v) in row.iter().enumerate().skip(1) {
        if *v > best.1 {
            best = (a, *v);
        }
    }
    best
}

/// Independent-learning target: best value of the agent's own next row.
pub fn target_il(q: &QTable, next_state: usize) -> f64 {
    q.greedy(next_state).1
}

/// Cooperative target over the tables of the agents sharing `next_state`.
///
/// Returns the maximum of the summed rows and the action attaining it.
pub fn target_cl(tables: &[&QTable], next_state: usize) -> Result<(f64, usize)> {
    let Some(first) = tables.first() else {
        return invalid("cooperative target needs at least one Q-table");
    };
    if tables
        .iter()
        .any(|t| t.actions != first.actions || t.states != first.states)
    {
        return invalid("cooperating Q-tables must share a shape");
    }
    let mut sum = vec![0.0; first.actions];
    for t in tables {
        for (acc, v) in sum.iter_mut().zip(t.row(next_state)) {
            *acc += v;
        }
    }
    let (a, v) = argmax(&sum);
    Ok((v, a))
}

/// Q-values an agent consults when it acts.
#[derive(Debug, Clone, Copy)]
pub enum QContext<'a> {
    Independent(&'a QTable),
    /// Tables of every agent in the same state, the acting agent included.
    Cooperative(&'a [&'a QTable]),
}

impl QContext<'_> {
    pub fn greedy(&self, state: usize) -> usize {
        match self {
            QContext::Independent(q) => q.greedy(state).0,
            QContext::Cooperative(tables) => target_cl(tables, state).map(|(_, a)| a).unwrap_or(0),
        }
    }

    fn actions(&self) -> usize {
        match self {
            QContext::Independent(q) => q.actions,
            QContext::Cooperative(tables) => tables.first().map_or(1, |t| t.actions),
        }
    }
}

/// e-greedy action selection.
pub fn select_action<R: Rng + ?Sized>(
    ctx: &QContext<'_>,
    state: usize,
    epsilon: f64,
    rng: &mut R,
) -> usize {
    let explore = rng.gen::<f64>() < epsilon;
    if explore {
        rng.gen_range(0..ctx.actions())
    } else {
        ctx.greedy(state)
    }
}

/// Mean of the empirical Bellman targets recorded for one state-action pair.
///
/// Under `α = 1/(1+t)` and zero initialisation the Q-value equals this mean.
pub fn mean_of_targets(targets: &[f64]) -> Result<f64> {
    if targets.is_empty() {
        return invalid("no targets recorded");
    }
    Ok(targets.iter().sum::<f64>() / targets.len() as f64)
}

/// One observed transition while learning on an explicit MDP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
    /// `reward + β max_b Q(next_state, b)` before the update.
    pub target: f64,
}

/// Q-learning on an explicit MDP with uniformly random actions.
///
/// `observe` sees the table after every update.
pub fn learn_explicit<R: Rng + ?Sized>(
    mdp: &ExplicitMdp,
    beta: f64,
    steps: usize,
    start: usize,
    rng: &mut R,
    mut observe: impl FnMut(&QTable, &Transition),
) -> QTable {
    let mut q = QTable::new(mdp.states(), mdp.actions());
    let mut s = start;
    for _ in 0..steps {
        let a = rng.gen_range(0..mdp.actions());
        let next = mdp.sample_next(s, a, rng.gen::<f64>());
        let reward = mdp.reward(s, a);
        let best_next = target_il(&q, next);
        q.update(s, a, reward, best_next, beta);
        let t = Transition {
            state: s,
            action: a,
            reward,
            next_state: next,
            target: reward + beta * best_next,
        };
        observe(&q, &t);
        s = next;
    }
    q
}
