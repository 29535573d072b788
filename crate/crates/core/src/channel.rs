//! Link budget for the urban dual-strip deployment.
//!
//! Gains are deterministic functions of geometry: `|h|^2 = 10^(-PL/10)`.
//! Index 0 of every matrix and power vector is the macro pair (MBS/MUE),
//! indices `1..=K` are the femto pairs (FBS/FUE).

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math;

/// Which row of the dual-strip pathloss table applies to a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LinkKind {
    MbsToMue,
    MbsToFue,
    FbsToFueSameStrip,
    /// Also used for FBS to MUE links.
    FbsToFueOtherStrip,
}

/// Pathloss in dB for one link.
///
/// `d2d_indoor_m` is the indoor 2-D distance; single-floor apartments use
/// `d2d_indoor_m == r_m`.
pub fn pathloss_db(kind: LinkKind, r_m: f64, d2d_indoor_m: f64, wall_loss_db: f64) -> Result<f64> {
    if !(r_m > 0.0) || !r_m.is_finite() {
        return invalid("link distance must be positive and finite");
    }
    if !(d2d_indoor_m >= 0.0) || !d2d_indoor_m.is_finite() {
        return invalid("indoor distance must be non-negative and finite");
    }
    let lg = math::log10(r_m);
    let pl = match kind {
        LinkKind::MbsToMue => 15.3 + 37.6 * lg,
        LinkKind::MbsToFue => 15.3 + 37.6 * lg + wall_loss_db,
        LinkKind::FbsToFueSameStrip => 56.76 + 20.0 * lg + 0.7 * d2d_indoor_m,
        LinkKind::FbsToFueOtherStrip => {
            let outdoor = f64::max(15.3 + 37.6 * lg, 38.46 + 20.0 * lg);
            outdoor + 18.3 + 0.7 * d2d_indoor_m + wall_loss_db
        }
    };
    Ok(pl)
}

/// Linear power gain for a loss in dB.
#[inline]
pub fn gain_linear(pl_db: f64) -> f64 {
    math::powf(10.0, -pl_db / 10.0)
}

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    math::powf(10.0, (dbm - 30.0) / 10.0)
}

#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * math::log10(watts) + 30.0
}

/// Thermal noise over the subband. The same power is used at every receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct NoiseModel {
    pub density_dbm_per_hz: f64,
    pub bandwidth_hz: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        // one LTE resource block
        Self {
            density_dbm_per_hz: -174.0,
            bandwidth_hz: 180e3,
        }
    }
}

impl NoiseModel {
    pub fn power_watts(&self) -> f64 {
        dbm_to_watts(self.density_dbm_per_hz + 10.0 * math::log10(self.bandwidth_hz))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) || !self.bandwidth_hz.is_finite() {
            return invalid("noise bandwidth must be positive");
        }
        if !self.density_dbm_per_hz.is_finite() {
            return invalid("noise density must be finite");
        }
        Ok(())
    }
}

/// `(K+1) x (K+1)` matrix of linear gains; entry `(tx, rx)` is the gain from
/// transmitter `tx` to receiver `rx`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelMatrix {
    size: usize,
    gains: Vec<f64>,
}

impl ChannelMatrix {
    /// Builds a matrix from row-major gains (`gains[tx * size + rx]`).
    pub fn new(size: usize, gains: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return invalid("channel matrix needs at least the macro pair");
        }
        if gains.len() != size * size {
            return invalid("channel matrix gains length must be size * size");
        }
        if gains.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return invalid("channel gains must be strictly positive and finite");
        }
        Ok(Self { size, gains })
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut gains = Vec::with_capacity(size * size);
        for tx in 0..size {
            for rx in 0..size {
                gains.push(f(tx, rx));
            }
        }
        Self::new(size, gains)
    }

    /// Number of transmitter/receiver pairs, `K + 1`.
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of femto pairs `K`.
    #[inline]
    pub fn num_femto(&self) -> usize {
        self.size - 1
    }

    #[inline]
    pub fn gain(&self, tx: usize, rx: usize) -> f64 {
        self.gains[tx * self.size + rx]
    }

    /// Gains `|h_{i,0}|^2` from every transmitter to the MUE.
    pub fn gains_to_mue(&self) -> Vec<f64> {
        (0..self.size).map(|tx| self.gain(tx, 0)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gains
    }

    /// Multiplies every gain by a per-link factor (small-scale fading hook).
    pub fn apply_fading(&mut self, mut factor: impl FnMut(usize, usize) -> f64) -> Result<()> {
        let size = self.size;
        for tx in 0..size {
            for rx in 0..size {
                let g = self.gains[tx * size + rx] * factor(tx, rx);
                if !(g > 0.0) || !g.is_finite() {
                    return invalid("fading produced a non-positive gain");
                }
                self.gains[tx * size + rx] = g;
            }
        }
        Ok(())
    }
}

/// SINR at the MUE. `femto[k - 1]` is the power of FBS `k`.
pub fn sinr_mue(p0: f64, femto: &[f64], ch: &ChannelMatrix, n0: f64) -> f64 {
    debug_assert_eq!(femto.len(), ch.num_femto());
    let interference: f64 = femto
        .iter()
        .enumerate()
        .map(|(j, p)| p * ch.gain(j + 1, 0))
        .sum();
    p0 * ch.gain(0, 0) / (interference + n0)
}

/// SINR at FUE `k` (1-based).
pub fn sinr_fue(k: usize, p0: f64, femto: &[f64], ch: &ChannelMatrix, nk: f64) -> Result<f64> {
    if k == 0 || k > femto.len() || femto.len() != ch.num_femto() {
        return invalid("femto index out of range");
    }
    Ok(sinr_fue_unchecked(k, p0, femto, ch, nk))
}

fn sinr_fue_unchecked(k: usize, p0: f64, femto: &[f64], ch: &ChannelMatrix, nk: f64) -> f64 {
    let mut interference = p0 * ch.gain(0, k) + nk;
    for (j, p) in femto.iter().enumerate() {
        if j + 1 != k {
            interference += p * ch.gain(j + 1, k);
        }
    }
    femto[k - 1] * ch.gain(k, k) / interference
}

/// All SINRs at once: index 0 is the MUE, index `k` is FUE `k`.
pub fn all_sinrs(p0: f64, femto: &[f64], ch: &ChannelMatrix, noise: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(femto.len() + 1);
    out.push(sinr_mue(p0, femto, ch, noise));
    for k in 1..=femto.len() {
        out.push(sinr_fue_unchecked(k, p0, femto, ch, noise));
    }
    out
}

/// Bandwidth-normalized rate in b/s/Hz.
#[inline]
pub fn rate(gamma: f64) -> f64 {
    math::log2(1.0 + gamma)
}

/// SINR threshold that corresponds to a required rate.
#[inline]
pub fn threshold_for_rate(rate_bps_hz: f64) -> f64 {
    math::powf(2.0, rate_bps_hz) - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pathloss_table_rows() {
        let pl = pathloss_db(LinkKind::MbsToMue, 350.0, 350.0, 20.0).unwrap();
        assert!(close(pl, 110.957, 1e-3), "{pl}");
        let pl = pathloss_db(LinkKind::FbsToFueSameStrip, 5.0, 5.0, 20.0).unwrap();
        assert!(close(pl, 74.239, 1e-3), "{pl}");
        let pl = pathloss_db(LinkKind::MbsToMue, 1.0, 1.0, 20.0).unwrap();
        assert!(close(pl, 15.3, 1e-12));
        let pl = pathloss_db(LinkKind::MbsToFue, 1.0, 1.0, 20.0).unwrap();
        assert!(close(pl, 35.3, 1e-12));
    }

    #[test]
    fn other_strip_takes_the_larger_outdoor_term() {
        // at 10 m: 15.3 + 37.6 = 52.9 vs 38.46 + 20 = 58.46
        let pl = pathloss_db(LinkKind::FbsToFueOtherStrip, 10.0, 10.0, 20.0).unwrap();
        assert!(close(pl, 58.46 + 18.3 + 7.0 + 20.0, 1e-9));
        // at 1000 m: 128.1 vs 98.46
        let pl = pathloss_db(LinkKind::FbsToFueOtherStrip, 1000.0, 0.0, 0.0).unwrap();
        assert!(close(pl, 15.3 + 112.8 + 18.3, 1e-9));
    }

    #[test]
    fn pathloss_rejects_bad_distance() {
        assert!(pathloss_db(LinkKind::MbsToMue, 0.0, 0.0, 20.0).is_err());
        assert!(pathloss_db(LinkKind::MbsToMue, -3.0, 0.0, 20.0).is_err());
        assert!(pathloss_db(LinkKind::MbsToMue, f64::NAN, 0.0, 20.0).is_err());
    }

    #[test]
    fn gain_conversion() {
        assert_eq!(gain_linear(0.0), 1.0);
        assert!(close(gain_linear(10.0), 0.1, 1e-15));
        let g = gain_linear(110.957);
        assert!((g - 8.02e-12).abs() / 8.02e-12 < 1e-3, "{g}");
    }

    #[test]
    fn noise_power() {
        let n = NoiseModel {
            density_dbm_per_hz: -174.0,
            bandwidth_hz: 1.0,
        };
        assert!((n.power_watts() - 10f64.powf(-20.4)).abs() < 1e-30);
        assert!(NoiseModel {
            bandwidth_hz: 0.0,
            ..NoiseModel::default()
        }
        .validate()
        .is_err());
    }

    fn two_by_two(h00: f64, h10: f64, h01: f64, h11: f64) -> ChannelMatrix {
        ChannelMatrix::new(2, vec![h00, h01, h10, h11]).unwrap()
    }

    #[test]
    fn mue_sinr_examples() {
        let ch = ChannelMatrix::new(1, vec![1e-11]).unwrap();
        assert!(close(sinr_mue(1.0, &[], &ch, 1e-12), 10.0, 1e-9));
        assert_eq!(sinr_mue(0.0, &[], &ch, 1e-12), 0.0);
        let ch = two_by_two(1e-11, 1e-11, 1.0, 1.0);
        assert!(close(sinr_mue(1.0, &[1.0], &ch, 1e-12), 1.0 / 1.1, 1e-12));
    }

    #[test]
    fn fue_sinr_examples() {
        let ch = two_by_two(1.0, 1.0, 1.0, 1e-8);
        assert_eq!(sinr_fue(1, 0.0, &[0.0], &ch, 1e-12).unwrap(), 0.0);
        assert!(close(
            sinr_fue(1, 0.0, &[1.0], &ch, 1e-12).unwrap(),
            1e4,
            1e-6
        ));

        let ch = ChannelMatrix::from_fn(3, |tx, rx| match (tx, rx) {
            (1, 1) | (2, 2) => 1e-8,
            (1, 2) | (2, 1) => 1e-10,
            _ => 1.0,
        })
        .unwrap();
        let g = sinr_fue(1, 0.0, &[0.01, 0.01], &ch, 1e-12).unwrap();
        // 1e-10 / (1e-12 + 1e-12)
        assert!(close(g, 50.0, 1e-9), "{g}");
        assert!(sinr_fue(0, 0.0, &[0.01, 0.01], &ch, 1e-12).is_err());
        assert!(sinr_fue(3, 0.0, &[0.01, 0.01], &ch, 1e-12).is_err());
    }

    #[test]
    fn rates() {
        assert_eq!(rate(0.0), 0.0);
        assert!(close(rate(15.0), 4.0, 1e-15));
        assert!(close(rate(1.0), 1.0, 1e-15));
        assert!(close(threshold_for_rate(4.0), 15.0, 1e-12));
        assert!(close(threshold_for_rate(0.5), 2f64.sqrt() - 1.0, 1e-15));
    }

    #[test]
    fn matrix_rejects_non_positive_gain() {
        assert!(ChannelMatrix::new(2, vec![1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(ChannelMatrix::new(2, vec![1.0, 1.0, 1.0]).is_err());
        assert!(ChannelMatrix::new(1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn all_sinrs_agrees_with_single_calls() {
        let ch = ChannelMatrix::from_fn(4, |tx, rx| 1e-9 * (1 + tx * 4 + rx) as f64).unwrap();
        let p = [0.01, 0.02, 0.005];
        let all = all_sinrs(2.0, &p, &ch, 1e-13);
        assert_eq!(all[0], sinr_mue(2.0, &p, &ch, 1e-13));
        for (k, g) in all.iter().enumerate().skip(1) {
            assert_eq!(*g, sinr_fue(k, 2.0, &p, &ch, 1e-13).unwrap());
        }
    }
}
