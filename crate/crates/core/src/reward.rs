//! Reward functions of an FBS over `(r0, rk)`, the MUE and FUE rates.
//!
//! All rewards are written in terms of the progress terms
//! `r0 - log2(1 + Γ0)` and `rk - log2(1 + Γk)`.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RewardKind {
    /// Sum of odd powers of both progress terms.
    #[default]
    Proposed,
    /// Negative squared distance from the threshold point.
    Quadratic,
    /// FUE rate minus an exponential penalty around the MUE threshold.
    Exponential,
    /// FUE rate minus a distance-weighted quadratic MUE penalty.
    Proximity,
}

impl RewardKind {
    pub fn name(&self) -> &'static str {
        match self {
            RewardKind::Proposed => "proposed",
            RewardKind::Quadratic => "quadratic",
            RewardKind::Exponential => "exponential",
            RewardKind::Proximity => "proximity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct RewardSpec {
    pub kind: RewardKind,
    /// Odd exponent is `2m - 1`.
    pub m: u32,
    pub bias_c: f64,
    /// Curvature of the exponential penalty.
    pub exp_lambda: f64,
    /// Reference distance of the proximity weight `ref / max(d, 1)`.
    pub proximity_ref_m: f64,
}

impl Default for RewardSpec {
    fn default() -> Self {
        Self {
            kind: RewardKind::Proposed,
            m: 2,
            bias_c: 0.0,
            exp_lambda: 1.0,
            proximity_ref_m: 45.0,
        }
    }
}

/// Shape parameters of the comparison rewards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonParams {
    pub exp_lambda: f64,
    pub proximity_ref_m: f64,
    /// FBS to MUE distance in metres.
    pub fbs_mue_dist_m: f64,
}

/// Everything a reward needs from one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardInputs {
    pub r0: f64,
    pub rk: f64,
    /// SINR thresholds `Γ0` and `Γk`.
    pub gamma0: f64,
    pub gammak: f64,
    pub fbs_mue_dist_m: f64,
}

pub fn proposed_reward(r0: f64, rk: f64, g0: f64, gk: f64, m: u32, c: f64) -> f64 {
    let e = 2 * m.max(1) as i32 - 1;
    math::powi(r0 - math::log2(1.0 + g0), e) + math::powi(rk - math::log2(1.0 + gk), e) + c
}

pub fn comparison_reward(
    kind: RewardKind,
    r0: f64,
    rk: f64,
    g0: f64,
    gk: f64,
    params: &ComparisonParams,
) -> Result<f64> {
    let d0 = r0 - math::log2(1.0 + g0);
    let dk = rk - math::log2(1.0 + gk);
    let r = match kind {
        RewardKind::Quadratic => -d0 * d0 - dk * dk,
        RewardKind::Exponential => rk - math::exp(params.exp_lambda * d0 * d0) + 1.0,
        RewardKind::Proximity => {
            let w = params.proximity_ref_m / params.fbs_mue_dist_m.max(1.0);
            rk - w * d0 * d0
        }
        RewardKind::Proposed => return invalid("the proposed reward is not a comparison reward"),
    };
    Ok(r)
}

impl RewardSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return invalid("reward exponent parameter m must be positive");
        }
        if !self.bias_c.is_finite()
            || !self.exp_lambda.is_finite()
            || !self.proximity_ref_m.is_finite()
        {
            return invalid("reward parameters must be finite");
        }
        if !(self.exp_lambda > 0.0) || !(self.proximity_ref_m > 0.0) {
            return invalid("reward shape parameters must be positive");
        }
        Ok(())
    }

    /// Reward including the bias constant.
    pub fn evaluate(&self, x: &RewardInputs) -> f64 {
        match self.kind {
            RewardKind::Proposed => {
                proposed_reward(x.r0, x.rk, x.gamma0, x.gammak, self.m, self.bias_c)
            }
            kind => {
                let params = ComparisonParams {
                    exp_lambda: self.exp_lambda,
                    proximity_ref_m: self.proximity_ref_m,
                    fbs_mue_dist_m: x.fbs_mue_dist_m,
                };
                comparison_reward(kind, x.r0, x.rk, x.gamma0, x.gammak, &params).unwrap_or(f64::NAN)
                    + self.bias_c
            }
        }
    }

    /// Reward as a function of `(r0, rk)` with everything else fixed.
    pub fn surface_fn(
        &self,
        gamma0: f64,
        gammak: f64,
        fbs_mue_dist_m: f64,
    ) -> impl Fn(f64, f64) -> f64 + '_ {
        move |r0, rk| {
            self.evaluate(&RewardInputs {
                r0,
                rk,
                gamma0,
                gammak,
                fbs_mue_dist_m,
            })
        }
    }
}

/// Samples the reward on a `steps x steps` grid over `[0, r0_max] x [0, rk_max]`.
pub fn reward_surface(
    spec: &RewardSpec,
    gamma0: f64,
    gammak: f64,
    fbs_mue_dist_m: f64,
    r0_max: f64,
    rk_max: f64,
    steps: usize,
) -> Vec<(f64, f64, f64)> {
    let f = spec.surface_fn(gamma0, gammak, fbs_mue_dist_m);
    let n = steps.max(2);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let r0 = r0_max * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let rk = rk_max * j as f64 / (n - 1) as f64;
            out.push((r0, rk, f(r0, rk)));
        }
    }
    out
}

/// Sign conditions on the partial derivatives of a reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SignProperty {
    /// Both partials non-negative: more rate, more reward.
    Increasing,
    /// `∂R/∂r_i · (r_i - t_i) <= 0` for both rates: pulled toward the thresholds.
    Conservative,
    /// Conservative in `r0`, increasing in `rk`.
    MueConservative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The point lies inside the exclusion band around a threshold.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignCheck {
    pub verdict: Verdict,
    pub d_r0: f64,
    pub d_rk: f64,
}

pub const FD_STEP: f64 = 1e-5;
pub const THRESHOLD_BAND: f64 = 1e-3;

/// Checks a sign property at `(r0, rk)` with central differences.
///
/// `targets` are the threshold rates `(log2(1+Γ0), log2(1+Γk))`.
pub fn check_property_signs(
    f: impl Fn(f64, f64) -> f64,
    point: (f64, f64),
    targets: (f64, f64),
    which: SignProperty,
) -> SignCheck {
    let (r0, rk) = point;
    let d_r0 = (f(r0 + FD_STEP, rk) - f(r0 - FD_STEP, rk)) / (2.0 * FD_STEP);
    let d_rk = (f(r0, rk + FD_STEP) - f(r0, rk - FD_STEP)) / (2.0 * FD_STEP);
    let off0 = r0 - targets.0;
    let offk = rk - targets.1;
    if off0.abs() <= THRESHOLD_BAND || offk.abs() <= THRESHOLD_BAND {
        return SignCheck {
            verdict: Verdict::Inconclusive,
            d_r0,
            d_rk,
        };
    }
    // round-off of a central difference scales with |f| / h
    let tol = 1e-8 * f(r0, rk).abs().max(1.0);
    let nonneg = |d: f64| d >= -tol;
    let toward = |d: f64, off: f64| d * off.signum() <= tol;
    let ok = match which {
        SignProperty::Increasing => nonneg(d_r0) && nonneg(d_rk),
        SignProperty::Conservative => toward(d_r0, off0) && toward(d_rk, offk),
        SignProperty::MueConservative => toward(d_r0, off0) && nonneg(d_rk),
    };
    SignCheck {
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        d_r0,
        d_rk,
    }
}
