//! Sample-complexity bounds for tabular Q-learning.

use alloc::vec::Vec;

use crate::channel;
use crate::error::{invalid, Result};
use crate::math;
use crate::mdp::{action_set, state_space_size, StateModel};
use crate::reward::{RewardInputs, RewardSpec};
use crate::topology::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComplexityInputs {
    pub r_max: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub x_card: u64,
    pub a_card: u64,
    pub t: u64,
}

fn check_common(r_max: f64, beta: f64, delta: f64, x_card: u64, a_card: u64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return invalid("discount must lie in (0, 1)");
    }
    if !(r_max > 0.0) || !r_max.is_finite() {
        return invalid("reward bound must be positive and finite");
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return invalid("failure probability must lie in (0, 1]");
    }
    if x_card == 0 || a_card == 0 {
        return invalid("state and action counts must be positive");
    }
    Ok(())
}

/// `V_max = R_max / (1 - β)`.
pub fn v_max(r_max: f64, beta: f64) -> f64 {
    r_max / (1.0 - beta)
}

/// High-probability sup-norm error after `t` iterations:
/// `2 R/(1-β) · [β/(T(1-β)) + sqrt((2/T) ln(2|X||A|/δ))]`.
pub fn epsilon_bound(x: &ComplexityInputs) -> Result<f64> {
    check_common(x.r_max, x.beta, x.delta, x.x_card, x.a_card)?;
    if x.t == 0 {
        return invalid("iteration count must be at least 1");
    }
    let t = x.t as f64;
    let log_term = math::ln(2.0 * x.x_card as f64 * x.a_card as f64 / x.delta);
    let bias = x.beta / (t * (1.0 - x.beta));
    let spread = math::sqrt(2.0 / t * log_term);
    Ok(2.0 * x.r_max / (1.0 - x.beta) * (bias + spread))
}

/// Iterations for ε-optimality with probability `1 - δ`:
/// `ceil(8 R² / (ε² (1-β)²) · ln(2|X||A|/δ))`.
pub fn min_iterations(
    r_max: f64,
    beta: f64,
    epsilon: f64,
    delta: f64,
    x_card: u64,
    a_card: u64,
) -> Result<u64> {
    check_common(r_max, beta, delta, x_card, a_card)?;
    if !(epsilon > 0.0) {
        return invalid("target error must be positive");
    }
    let scale = 8.0 * r_max * r_max / (epsilon * epsilon * (1.0 - beta) * (1.0 - beta));
    let t = math::ceil(scale * math::ln(2.0 * x_card as f64 * a_card as f64 / delta));
    if !(t < u64::MAX as f64) {
        return invalid("iteration count overflows");
    }
    Ok((t as u64).max(1))
}

/// Frames to visit every state-action pair `t` times.
pub fn training_length(t: u64, x_card: u64, a_card: u64) -> u64 {
    t.saturating_mul(x_card).saturating_mul(a_card)
}

/// Largest `|R|` over `[0, r0_hi] x [0, rk_hi]`.
///
/// Every reward here is monotone or unimodal in each rate with its turning
/// point at the threshold, so the extremes sit on the grid formed by
/// `{0, threshold, upper end}` in each coordinate.
pub fn reward_bound_on_box(
    spec: &RewardSpec,
    r0_hi: f64,
    rk_hi: f64,
    gamma0: f64,
    gammak: f64,
    fbs_mue_distances: &[f64],
) -> f64 {
    let t0 = channel::rate(gamma0).clamp(0.0, r0_hi.max(0.0));
    let tk = channel::rate(gammak).clamp(0.0, rk_hi.max(0.0));
    let c0 = [0.0, t0, r0_hi];
    let ck = [0.0, tk, rk_hi];
    let dists: Vec<f64> = if fbs_mue_distances.is_empty() {
        alloc::vec![1.0]
    } else {
        fbs_mue_distances.to_vec()
    };
    let mut best = 0.0f64;
    for &d in &dists {
        for &r0 in &c0 {
            for &rk in &ck {
                let v = spec.evaluate(&RewardInputs {
                    r0,
                    rk,
                    gamma0,
                    gammak,
                    fbs_mue_dist_m: d,
                });
                best = best.max(v.abs());
            }
        }
    }
    best
}

/// Largest reward magnitude reachable in a scenario. Rates are capped by
/// their interference-free values at maximum power.
pub fn reward_bound(scenario: &Scenario, spec: &RewardSpec) -> Result<f64> {
    let cfg = &scenario.config;
    let n = scenario.noise_watts();
    let r0_hi = channel::rate(scenario.mbs_power_watts() * scenario.channel.gain(0, 0) / n);
    let pmax = action_set(cfg.fbs_pmin_dbm, cfg.fbs_pmax_dbm, cfg.fbs_step_db)?.max_watts();
    let rk_hi = (1..=scenario.num_femto())
        .map(|k| channel::rate(pmax * scenario.channel.gain(k, k) / n))
        .fold(0.0, f64::max);
    let dists: Vec<f64> = (1..=scenario.num_femto())
        .map(|k| scenario.fbs_mue_distance(k))
        .collect();
    Ok(reward_bound_on_box(
        spec,
        r0_hi,
        rk_hi,
        cfg.gamma0(),
        cfg.gammak(),
        &dists,
    ))
}

/// Theoretical training budget for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainingBudget {
    pub r_max: f64,
    pub v_max: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub x_card: u64,
    pub a_card: u64,
    pub iterations: u64,
    pub frames: u64,
}

/// Budget for reaching `optimality` (e.g. 0.9) of `V_max`, i.e.
/// `ε = (1 - optimality) · V_max`, with probability `1 - δ`.
pub fn theoretical_budget(
    scenario: &Scenario,
    spec: &RewardSpec,
    model: StateModel,
    beta: f64,
    optimality: f64,
    delta: f64,
) -> Result<TrainingBudget> {
    if !(optimality > 0.0 && optimality < 1.0) {
        return invalid("optimality must lie in (0, 1)");
    }
    let cfg = &scenario.config;
    let r_max = reward_bound(scenario, spec)?;
    let v = v_max(r_max, beta);
    let epsilon = (1.0 - optimality) * v;
    let x_card = state_space_size(
        model,
        cfg.ring_radii_mue_m.len(),
        cfg.ring_radii_mbs_m.len(),
    ) as u64;
    let a_card = action_set(cfg.fbs_pmin_dbm, cfg.fbs_pmax_dbm, cfg.fbs_step_db)?.len() as u64;
    let iterations = min_iterations(r_max, beta, epsilon, delta, x_card, a_card)?;
    Ok(TrainingBudget {
        r_max,
        v_max: v,
        epsilon,
        delta,
        x_card,
        a_card,
        iterations,
        frames: training_length(iterations, x_card, a_card),
    })
}
