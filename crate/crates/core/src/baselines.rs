//! Reference solutions: the max-power greedy rule, exhaustive search over
//! the joint power grid, and exact dynamic programming on small explicit
//! MDPs used to check the learning engine.

use alloc::vec;
use alloc::vec::Vec;

use crate::channel;
use crate::error::{invalid, Error, Result};
use crate::learning::QTable;
use crate::mdp::ActionSet;
use crate::topology::Scenario;

/// Every FBS at maximum power.
pub fn greedy_powers(k_active: usize, actions: &ActionSet) -> Vec<f64> {
    vec![actions.max_watts(); k_active]
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Feasibility {
    pub feasible: bool,
    /// `γ0 - Γ0`.
    pub mue_slack: f64,
    /// `γk - Γk` for each femto pair.
    pub fue_slacks: Vec<f64>,
}

impl Feasibility {
    pub fn min_slack(&self) -> f64 {
        self.fue_slacks
            .iter()
            .fold(self.mue_slack, |m, s| m.min(*s))
    }
}

/// SINR constraints of the sum-rate problem for femto powers `p`.
pub fn check_feasible(p: &[f64], scenario: &Scenario) -> Feasibility {
    let sinrs = scenario.sinrs(p);
    feasibility_from_sinrs(&sinrs, scenario.config.gamma0(), scenario.config.gammak())
}

fn feasibility_from_sinrs(sinrs: &[f64], gamma0: f64, gammak: f64) -> Feasibility {
    let mue_slack = sinrs[0] - gamma0;
    let fue_slacks: Vec<f64> = sinrs[1..].iter().map(|g| g - gammak).collect();
    let feasible = mue_slack >= 0.0 && fue_slacks.iter().all(|s| *s >= 0.0);
    Feasibility {
        feasible,
        mue_slack,
        fue_slacks,
    }
}

/// Sum of FUE rates for femto powers `p`.
pub fn sum_rate(p: &[f64], scenario: &Scenario) -> f64 {
    scenario.sinrs(p)[1..]
        .iter()
        .map(|g| channel::rate(*g))
        .sum()
}

/// Outcome of an exhaustive search.
///
/// When no vector is feasible the result holds the vector with the largest
/// minimum slack and `feasible == false`; `objective` is still its sum rate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveResult {
    pub best_levels: Vec<usize>,
    pub best_powers: Vec<f64>,
    pub objective: f64,
    pub feasible: bool,
    pub min_slack: f64,
    pub evaluated_count: u64,
    /// Lexicographic rank of `best_levels` in the joint grid.
    pub rank: u64,
}

pub const DEFAULT_MAX_JOINT: u64 = 10_000_000;

/// Size of the joint grid, `|A|^K`.
pub fn joint_size(levels: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, _| acc.saturating_mul(levels as u128))
}

/// Enumerates every joint power vector and returns the best one.
pub fn exhaustive_search(
    scenario: &Scenario,
    actions: &ActionSet,
    max_joint: u64,
) -> Result<SolveResult> {
    let total = check_budget(scenario, actions, max_joint)?;
    Ok(exhaustive_search_range(scenario, actions, 0, total))
}

/// Checks the budget and returns the number of joint vectors.
pub fn check_budget(scenario: &Scenario, actions: &ActionSet, max_joint: u64) -> Result<u64> {
    let required = joint_size(actions.len(), scenario.num_femto());
    if required > max_joint as u128 {
        return Err(Error::BudgetExceeded {
            required,
            budget: max_joint,
        });
    }
    Ok(required as u64)
}

fn decode(mut rank: u64, levels: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = (rank % levels as u64) as usize;
        rank /= levels as u64;
    }
}

/// Searches ranks `start..end` of the joint grid. Results of disjoint ranges
/// combine with [`merge_results`].
pub fn exhaustive_search_range(
    scenario: &Scenario,
    actions: &ActionSet,
    start: u64,
    end: u64,
) -> SolveResult {
    let k = scenario.num_femto();
    let n = actions.len();
    let gamma0 = scenario.config.gamma0();
    let gammak = scenario.config.gammak();
    let mut levels = vec![0usize; k];
    decode(start, n, &mut levels);
    let mut powers: Vec<f64> = levels.iter().map(|a| actions.watts(*a)).collect();

    let mut best: Option<SolveResult> = None;
    for rank in start..end {
        let sinrs = scenario.sinrs(&powers);
        let feas = feasibility_from_sinrs(&sinrs, gamma0, gammak);
        let objective: f64 = sinrs[1..].iter().map(|g| channel::rate(*g)).sum();
        let min_slack = feas.min_slack();
        let better = match &best {
            None => true,
            Some(b) => match (feas.feasible, b.feasible) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => objective > b.objective,
                (false, false) => min_slack > b.min_slack,
            },
        };
        if better {
            best = Some(SolveResult {
                best_levels: levels.clone(),
                best_powers: powers.clone(),
                objective,
                feasible: feas.feasible,
                min_slack,
                evaluated_count: 0,
                rank,
            });
        }
        // odometer increment, last agent fastest
        for i in (0..k).rev() {
            levels[i] += 1;
            if levels[i] < n {
                powers[i] = actions.watts(levels[i]);
                break;
            }
            levels[i] = 0;
            powers[i] = actions.watts(0);
        }
    }
    let mut out = best.unwrap_or(SolveResult {
        best_levels: Vec::new(),
        best_powers: Vec::new(),
        objective: f64::NEG_INFINITY,
        feasible: false,
        min_slack: f64::NEG_INFINITY,
        evaluated_count: 0,
        rank: u64::MAX,
    });
    out.evaluated_count = end.saturating_sub(start);
    out
}

/// Associative combination of two partial searches.
pub fn merge_results(a: SolveResult, b: SolveResult) -> SolveResult {
    let count = a.evaluated_count + b.evaluated_count;
    let a_wins = match (a.feasible, b.feasible) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => {
            a.objective > b.objective || (a.objective == b.objective && a.rank < b.rank)
        }
        (false, false) => {
            a.min_slack > b.min_slack || (a.min_slack == b.min_slack && a.rank < b.rank)
        }
    };
    let mut out = if a_wins { a } else { b };
    out.evaluated_count = count;
    out
}

/// Small MDP with explicit transition probabilities and rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitMdp {
    states: usize,
    actions: usize,
    /// `transitions[(s * actions + a) * states + s2]`
    transitions: Vec<f64>,
    /// `rewards[s * actions + a]`
    rewards: Vec<f64>,
}

impl ExplicitMdp {
    pub fn new(
        states: usize,
        actions: usize,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
    ) -> Result<Self> {
        if states == 0 || actions == 0 {
            return invalid("MDP needs at least one state and one action");
        }
        if transitions.len() != states * actions * states || rewards.len() != states * actions {
            return invalid("MDP tables have the wrong shape");
        }
        for row in transitions.chunks(states) {
            let total: f64 = row.iter().sum();
            if row.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                return invalid("transition rows must be probability distributions");
            }
        }
        if rewards.iter().any(|r| !r.is_finite()) {
            return invalid("rewards must be finite");
        }
        Ok(Self {
            states,
            actions,
            transitions,
            rewards,
        })
    }

    /// Random MDP: rewards uniform in `[lo, hi]`, transition rows uniform on
    /// the simplex.
    pub fn random<R: rand::Rng + ?Sized>(
        rng: &mut R,
        states: usize,
        actions: usize,
        lo: f64,
        hi: f64,
    ) -> Result<Self> {
        let mut transitions = Vec::with_capacity(states * actions * states);
        for _ in 0..states * actions {
            let row: Vec<f64> = (0..states)
                .map(|_| -crate::math::ln(1.0 - rng.gen::<f64>()))
                .collect();
            let total: f64 = row.iter().sum();
            transitions.extend(row.iter().map(|x| x / total));
        }
        let rewards = (0..states * actions)
            .map(|_| rng.gen_range(lo..=hi))
            .collect();
        Self::new(states, actions, transitions, rewards)
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s * self.actions + a]
    }

    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let i = (s * self.actions + a) * self.states;
        &self.transitions[i..i + self.states]
    }

    pub fn max_abs_reward(&self) -> f64 {
        self.rewards.iter().fold(0.0, |m, r| f64::max(m, r.abs()))
    }

    /// Next state by inverse-CDF sampling with `u` uniform in `[0, 1)`.
    pub fn sample_next(&self, s: usize, a: usize, u: f64) -> usize {
        let mut acc = 0.0;
        let row = self.transition_row(s, a);
        for (s2, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return s2;
            }
        }
        // u lands past the accumulated mass only through round-off
        row.iter()
            .rposition(|p| *p > 0.0)
            .unwrap_or(self.states - 1)
    }

    /// Same MDP with `c` added to every reward.
    pub fn with_reward_bias(&self, c: f64) -> Self {
        Self {
            rewards: self.rewards.iter().map(|r| r + c).collect(),
            ..self.clone()
        }
    }
}

/// One application of the Bellman optimality operator.
pub fn bellman_optimality(mdp: &ExplicitMdp, q: &QTable, beta: f64) -> QTable {
    let v: Vec<f64> = (0..mdp.states).map(|s| q.greedy(s).1).collect();
    let mut out = Vec::with_capacity(mdp.states * mdp.actions);
    for s in 0..mdp.states {
        for a in 0..mdp.actions {
            let ev: f64 = mdp
                .transition_row(s, a)
                .iter()
                .zip(&v)
                .map(|(p, x)| p * x)
                .sum();
            out.push(mdp.reward(s, a) + beta * ev);
        }
    }
    QTable::from_values(mdp.states, mdp.actions, out).expect("finite Bellman update")
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

/// Optimal action values, iterated until the sup-norm residual drops below `tol`.
pub fn value_iteration(mdp: &ExplicitMdp, beta: f64, tol: f64) -> Result<QTable> {
    if !(0.0..1.0).contains(&beta) {
        return invalid("value iteration needs a discount in [0, 1)");
    }
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let mut q = QTable::new(mdp.states, mdp.actions);
    loop {
        let next = bellman_optimality(mdp, &q, beta);
        let residual = sup_diff(next.values(), q.values());
        q = next;
        if residual < tol {
            return Ok(q);
        }
    }
}

/// State values of a deterministic policy (`policy[s]` is the action).
pub fn policy_evaluation(
    mdp: &ExplicitMdp,
    policy: &[usize],
    beta: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&beta) {
        return invalid("policy evaluation needs a discount in [0, 1)");
    }
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    if policy.len() != mdp.states || policy.iter().any(|a| *a >= mdp.actions) {
        return invalid("policy must pick a valid action in every state");
    }
    let mut v = vec![0.0; mdp.states];
    loop {
        let next: Vec<f64> = (0..mdp.states)
            .map(|s| {
                let a = policy[s];
                let ev: f64 = mdp
                    .transition_row(s, a)
                    .iter()
                    .zip(&v)
                    .map(|(p, x)| p * x)
                    .sum();
                mdp.reward(s, a) + beta * ev
            })
            .collect();
        let residual = sup_diff(&next, &v);
        v = next;
        if residual < tol {
            return Ok(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::action_set;
    use crate::topology::{build_scenario, ScenarioConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn default_actions() -> ActionSet {
        action_set(5.0, 15.0, 1.0).unwrap()
    }

    #[test]
    fn greedy_examples() {
        let a = default_actions();
        let p = greedy_powers(10, &a);
        assert!((p.iter().sum::<f64>() - 0.316_227_766).abs() < 1e-9);
        assert!((greedy_powers(1, &a)[0] - 0.031_622_776_6).abs() < 1e-10);
        assert!(greedy_powers(0, &a).is_empty());
    }

    #[test]
    fn zero_power_femto_is_infeasible() {
        let s = build_scenario(&ScenarioConfig::default(), 3).unwrap();
        let f = check_feasible(&[0.01, 0.0, 0.01], &s);
        assert!(!f.feasible);
        assert!(f.fue_slacks[1] < 0.0);
    }

    #[test]
    fn feasibility_matches_direct_sinr() {
        let s = build_scenario(&ScenarioConfig::default(), 1).unwrap();
        let p = default_actions().watts(5);
        let f = check_feasible(&[p], &s);
        let ch = &s.channel;
        let n = s.noise_watts();
        let p0 = s.mbs_power_watts();
        let g0 = p0 * ch.gain(0, 0) / (p * ch.gain(1, 0) + n);
        let g1 = p * ch.gain(1, 1) / (p0 * ch.gain(0, 1) + n);
        assert!((f.mue_slack - (g0 - s.config.gamma0())).abs() <= 1e-9 * g0);
        assert!((f.fue_slacks[0] - (g1 - s.config.gammak())).abs() <= 1e-9 * g1);
        assert_eq!(
            f.feasible,
            g0 >= s.config.gamma0() && g1 >= s.config.gammak()
        );
    }

    #[test]
    fn exhaustive_single_femto_matches_a_direct_loop() {
        let a = default_actions();
        for seed in 0..4 {
            let s = build_scenario(
                &ScenarioConfig {
                    seed,
                    ..ScenarioConfig::default()
                },
                1,
            )
            .unwrap();
            let r = exhaustive_search(&s, &a, DEFAULT_MAX_JOINT).unwrap();
            let mut best: Option<(usize, f64)> = None;
            for i in 0..a.len() {
                let p = [a.watts(i)];
                if check_feasible(&p, &s).feasible {
                    let obj = sum_rate(&p, &s);
                    if best.is_none_or(|(_, b)| obj > b) {
                        best = Some((i, obj));
                    }
                }
            }
            let (i, obj) = best.unwrap();
            assert!(r.feasible);
            assert_eq!(r.best_levels, vec![i]);
            assert!((r.objective - obj).abs() <= 1e-12 * obj);
            assert_eq!(r.evaluated_count, 11);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let a = default_actions();
        let s = build_scenario(&ScenarioConfig::default(), 8).unwrap();
        match exhaustive_search(&s, &a, DEFAULT_MAX_JOINT) {
            Err(Error::BudgetExceeded { required, .. }) => assert_eq!(required, 214_358_881),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn unattainable_mue_threshold_is_reported_infeasible() {
        let cfg = ScenarioConfig {
            gamma0_rate: 40.0,
            ..ScenarioConfig::default()
        };
        let s = build_scenario(&cfg, 2).unwrap();
        let r = exhaustive_search(&s, &default_actions(), DEFAULT_MAX_JOINT).unwrap();
        assert!(!r.feasible);
        // the best slack for the MUE comes from the quietest femtocells
        assert_eq!(r.best_levels, vec![0, 0]);
    }

    #[test]
    fn partitioned_search_matches_the_full_one() {
        let a = action_set(5.0, 15.0, 2.0).unwrap();
        let s = build_scenario(
            &ScenarioConfig {
                seed: 3,
                ..ScenarioConfig::default()
            },
            3,
        )
        .unwrap();
        let full = exhaustive_search(&s, &a, DEFAULT_MAX_JOINT).unwrap();
        let parts = [(0, 50), (50, 51), (51, 216)];
        let merged = parts
            .iter()
            .map(|(lo, hi)| exhaustive_search_range(&s, &a, *lo, *hi))
            .reduce(merge_results)
            .unwrap();
        assert_eq!(merged, full);
        let merged_rev = parts
            .iter()
            .rev()
            .map(|(lo, hi)| exhaustive_search_range(&s, &a, *lo, *hi))
            .reduce(merge_results)
            .unwrap();
        assert_eq!(merged_rev, full);
    }

    #[test]
    fn single_state_value_iteration() {
        let mdp = ExplicitMdp::new(1, 2, vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let q = value_iteration(&mdp, 0.9, 1e-12).unwrap();
        for a in 0..2 {
            assert!((q.value(0, a) - 10.0).abs() < 1e-9);
        }
        assert!(value_iteration(&mdp, 1.0, 1e-6).is_err());
    }

    #[test]
    fn two_state_chain_closed_form() {
        // action 0 stays, action 1 switches; reward 1 only in state 1
        let t = vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let r = vec![0.0, 0.0, 1.0, 1.0];
        let mdp = ExplicitMdp::new(2, 2, t, r).unwrap();
        let b = 0.9;
        let q = value_iteration(&mdp, b, 1e-12).unwrap();
        // V(1) = 1/(1-b); V(0) = b V(1)
        let v1 = 1.0 / (1.0 - b);
        let v0 = b * v1;
        assert!((q.value(1, 0) - v1).abs() < 1e-9);
        assert!((q.value(1, 1) - (1.0 + b * v0)).abs() < 1e-9);
        assert!((q.value(0, 1) - v0).abs() < 1e-9);
        assert!((q.value(0, 0) - b * v0).abs() < 1e-9);
    }

    #[test]
    fn tolerance_cauchy() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mdp = ExplicitMdp::random(&mut rng, 4, 3, -1.0, 1.0).unwrap();
        let fine = value_iteration(&mdp, 0.9, 1e-10).unwrap();
        let coarse = value_iteration(&mdp, 0.9, 1e-6).unwrap();
        assert!(sup_diff(fine.values(), coarse.values()) < 1e-5);
        let again = bellman_optimality(&mdp, &fine, 0.9);
        assert!(sup_diff(again.values(), fine.values()) < 1e-10);
    }

    #[test]
    fn policy_evaluation_examples() {
        let mdp = ExplicitMdp::new(1, 1, vec![1.0], vec![2.0]).unwrap();
        let v = policy_evaluation(&mdp, &[0], 0.9, 1e-12).unwrap();
        assert!((v[0] - 20.0).abs() < 1e-9);

        // deterministic loop 0 -> 1 -> 0 with rewards (1, 0)
        let mdp = ExplicitMdp::new(2, 1, vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 0.0]).unwrap();
        let v = policy_evaluation(&mdp, &[0, 0], 0.5, 1e-14).unwrap();
        assert!((v[0] - 4.0 / 3.0).abs() < 1e-12);
        assert!((v[1] - 2.0 / 3.0).abs() < 1e-12);

        assert!(policy_evaluation(&mdp, &[0], 0.5, 1e-9).is_err());
        assert!(policy_evaluation(&mdp, &[0, 1], 0.5, 1e-9).is_err());
    }

    #[test]
    fn mdp_validation() {
        assert!(ExplicitMdp::new(1, 1, vec![0.5], vec![0.0]).is_err());
        assert!(ExplicitMdp::new(2, 1, vec![0.5, 0.5], vec![0.0, 0.0]).is_err());
    }
}
