//! Dual-strip apartment block geometry.
//!
//! The MBS sits at the origin. The block is centred `block_distance_m` away
//! along +x, its strips run parallel to the y axis and are separated by a
//! street. The MUE stands in the street at the block centre (plus an
//! optional offset). Each apartment has an FBS at its centre and an FUE
//! drawn uniformly inside an annulus around it, clipped to the apartment.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{self, ChannelMatrix, LinkKind, NoiseModel};
use crate::error::{invalid, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        math::hypot(self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ScenarioConfig {
    pub macro_radius_m: f64,
    /// Distance from the MBS to the block centre.
    pub block_distance_m: f64,
    pub apartment_size_m: f64,
    pub apartments_per_strip: usize,
    pub strips: usize,
    pub street_width_m: f64,
    pub fue_max_dist_m: f64,
    /// Keeps FUEs out of the pathloss near field.
    pub fue_min_dist_m: f64,
    pub mbs_power_dbm: f64,
    pub fbs_pmin_dbm: f64,
    pub fbs_pmax_dbm: f64,
    pub fbs_step_db: f64,
    /// Required MUE rate in b/s/Hz.
    pub gamma0_rate: f64,
    /// Required FUE rate in b/s/Hz.
    pub gammak_rate: f64,
    pub ring_radii_mue_m: Vec<f64>,
    pub ring_radii_mbs_m: Vec<f64>,
    pub wall_loss_db: f64,
    pub mue_offset_m: [f64; 2],
    pub noise: NoiseModel,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            macro_radius_m: 350.0,
            block_distance_m: 350.0,
            apartment_size_m: 10.0,
            apartments_per_strip: 5,
            strips: 2,
            street_width_m: 10.0,
            fue_max_dist_m: 5.0,
            fue_min_dist_m: 1.0,
            mbs_power_dbm: 33.0,
            fbs_pmin_dbm: 5.0,
            fbs_pmax_dbm: 15.0,
            fbs_step_db: 1.0,
            gamma0_rate: 4.0,
            gammak_rate: 0.5,
            ring_radii_mue_m: alloc::vec![17.5, 22.5, 45.0],
            ring_radii_mbs_m: alloc::vec![50.0, 150.0, 400.0],
            wall_loss_db: 20.0,
            mue_offset_m: [0.0, 0.0],
            noise: NoiseModel::default(),
            seed: 0,
        }
    }
}

fn check_radii(radii: &[f64], what: &str) -> Result<()> {
    if radii.is_empty() {
        return invalid(alloc::format!("{what} ring radii must not be empty"));
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid(alloc::format!(
            "{what} ring radii must be positive and strictly increasing"
        ));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.apartments_per_strip == 0 || self.strips == 0 {
            return invalid("block must contain at least one apartment");
        }
        if !(self.apartment_size_m > 0.0) || !(self.street_width_m >= 0.0) {
            return invalid("apartment size must be positive and street width non-negative");
        }
        if !(self.fue_max_dist_m > 0.0)
            || !(self.fue_min_dist_m > 0.0)
            || self.fue_min_dist_m > self.fue_max_dist_m
        {
            return invalid("FUE distance band must satisfy 0 < min <= max");
        }
        if self.fue_min_dist_m * core::f64::consts::SQRT_2 > self.apartment_size_m {
            return invalid("minimum FUE distance does not fit inside the apartment");
        }
        if !(self.fbs_pmin_dbm <= self.fbs_pmax_dbm) {
            return invalid("FBS minimum power must not exceed the maximum");
        }
        crate::mdp::action_set(self.fbs_pmin_dbm, self.fbs_pmax_dbm, self.fbs_step_db)?;
        check_radii(&self.ring_radii_mue_m, "MUE")?;
        check_radii(&self.ring_radii_mbs_m, "MBS")?;
        self.noise.validate()?;
        Ok(())
    }

    pub fn num_apartments(&self) -> usize {
        self.apartments_per_strip * self.strips
    }

    /// SINR threshold of the MUE, `2^rate - 1`.
    pub fn gamma0(&self) -> f64 {
        channel::threshold_for_rate(self.gamma0_rate)
    }

    /// SINR threshold of every FUE.
    pub fn gammak(&self) -> f64 {
        channel::threshold_for_rate(self.gammak_rate)
    }

    pub fn mbs_power_watts(&self) -> f64 {
        channel::dbm_to_watts(self.mbs_power_dbm)
    }

    /// Centre of apartment `a` and the strip it belongs to. Apartments are
    /// numbered strip-major.
    pub fn apartment_center(&self, a: usize) -> (Point, usize) {
        let strip = a / self.apartments_per_strip;
        let slot = a % self.apartments_per_strip;
        let pitch = self.apartment_size_m + self.street_width_m;
        let x = self.block_distance_m + (strip as f64 - (self.strips as f64 - 1.0) / 2.0) * pitch;
        let y =
            (slot as f64 - (self.apartments_per_strip as f64 - 1.0) / 2.0) * self.apartment_size_m;
        (Point::new(x, y), strip)
    }

    /// Density of `k` active femtocells over the block footprint.
    pub fn density_fbs_per_km2(&self, k: usize) -> f64 {
        k as f64 / self.block_footprint_km2()
    }

    /// Bounding box of all strips, in km².
    pub fn block_footprint_km2(&self) -> f64 {
        let len = self.apartments_per_strip as f64 * self.apartment_size_m;
        let width = self.strips as f64 * self.apartment_size_m
            + (self.strips as f64 - 1.0) * self.street_width_m;
        len * width * 1e-6
    }
}

/// One realisation of the deployment with `K` active femtocells.
///
/// Femto index `k` (1-based) lives in apartment `apartment[k - 1]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub mbs: Point,
    pub mue: Point,
    pub fbs: Vec<Point>,
    pub fue: Vec<Point>,
    pub strip: Vec<usize>,
    pub apartment: Vec<usize>,
    pub channel: ChannelMatrix,
}

/// Activation order and FUE positions for every apartment, drawn from the seed.
///
/// FUEs are drawn per apartment in apartment order, so the draw does not
/// depend on how many femtocells are active.
fn draw_layout(cfg: &ScenarioConfig) -> (Vec<usize>, Vec<Point>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.num_apartments();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let half = cfg.apartment_size_m / 2.0;
    let (r_lo, r_hi) = (cfg.fue_min_dist_m, cfg.fue_max_dist_m);
    let fue = (0..n)
        .map(|a| {
            let (c, _) = cfg.apartment_center(a);
            loop {
                let u: f64 = rng.gen();
                let r = math::sqrt(r_lo * r_lo + u * (r_hi * r_hi - r_lo * r_lo));
                let theta = rng.gen::<f64>() * core::f64::consts::TAU;
                let (dx, dy) = (r * math::cos(theta), r * math::sin(theta));
                if dx.abs() <= half && dy.abs() <= half {
                    break Point::new(c.x + dx, c.y + dy);
                }
            }
        })
        .collect();
    (order, fue)
}

/// Builds the scenario with the first `k_active` femtocells of the seeded
/// activation order.
pub fn build_scenario(cfg: &ScenarioConfig, k_active: usize) -> Result<Scenario> {
    cfg.validate()?;
    if k_active == 0 || k_active > cfg.num_apartments() {
        return invalid(alloc::format!(
            "k_active must be in 1..={}, got {k_active}",
            cfg.num_apartments()
        ));
    }
    let (order, fue_all) = draw_layout(cfg);
    let mbs = Point::new(0.0, 0.0);
    let mue = Point::new(
        cfg.block_distance_m + cfg.mue_offset_m[0],
        cfg.mue_offset_m[1],
    );

    let apartment: Vec<usize> = order[..k_active].to_vec();
    let mut fbs = Vec::with_capacity(k_active);
    let mut strip = Vec::with_capacity(k_active);
    let mut fue = Vec::with_capacity(k_active);
    for &a in &apartment {
        let (c, s) = cfg.apartment_center(a);
        fbs.push(c);
        strip.push(s);
        fue.push(fue_all[a]);
    }

    let mut scenario = Scenario {
        config: cfg.clone(),
        mbs,
        mue,
        fbs,
        fue,
        strip,
        apartment,
        channel: ChannelMatrix::new(1, alloc::vec![1.0])?,
    };
    let size = k_active + 1;
    let mut gains = Vec::with_capacity(size * size);
    for tx in 0..size {
        for rx in 0..size {
            let r = scenario.link_distance(tx, rx);
            let pl = channel::pathloss_db(scenario.link_kind(tx, rx), r, r, cfg.wall_loss_db)?;
            gains.push(channel::gain_linear(pl));
        }
    }
    scenario.channel = ChannelMatrix::new(size, gains)?;
    Ok(scenario)
}

impl Scenario {
    pub fn num_femto(&self) -> usize {
        self.fbs.len()
    }

    pub fn transmitter(&self, tx: usize) -> Point {
        if tx == 0 {
            self.mbs
        } else {
            self.fbs[tx - 1]
        }
    }

    pub fn receiver(&self, rx: usize) -> Point {
        if rx == 0 {
            self.mue
        } else {
            self.fue[rx - 1]
        }
    }

    pub fn link_distance(&self, tx: usize, rx: usize) -> f64 {
        self.transmitter(tx).distance(&self.receiver(rx))
    }

    /// Pathloss row for transmitter `tx` and receiver `rx`.
    pub fn link_kind(&self, tx: usize, rx: usize) -> LinkKind {
        match (tx, rx) {
            (0, 0) => LinkKind::MbsToMue,
            (0, _) => LinkKind::MbsToFue,
            (_, 0) => LinkKind::FbsToFueOtherStrip,
            (j, k) if self.strip[j - 1] == self.strip[k - 1] => LinkKind::FbsToFueSameStrip,
            _ => LinkKind::FbsToFueOtherStrip,
        }
    }

    pub fn noise_watts(&self) -> f64 {
        self.config.noise.power_watts()
    }

    pub fn mbs_power_watts(&self) -> f64 {
        self.config.mbs_power_watts()
    }

    pub fn fbs_mue_distance(&self, k: usize) -> f64 {
        self.fbs[k - 1].distance(&self.mue)
    }

    pub fn fbs_mbs_distance(&self, k: usize) -> f64 {
        self.fbs[k - 1].distance(&self.mbs)
    }

    /// `X3`: ring of FBS `k` around the MUE.
    pub fn mue_ring(&self, k: usize) -> usize {
        ring_index_unchecked(self.fbs_mue_distance(k), &self.config.ring_radii_mue_m)
    }

    /// `X4`: ring of FBS `k` around the MBS.
    pub fn mbs_ring(&self, k: usize) -> usize {
        ring_index_unchecked(self.fbs_mbs_distance(k), &self.config.ring_radii_mbs_m)
    }

    /// SINRs (index 0 = MUE) for the given femto powers.
    pub fn sinrs(&self, femto_watts: &[f64]) -> Vec<f64> {
        channel::all_sinrs(
            self.mbs_power_watts(),
            femto_watts,
            &self.channel,
            self.noise_watts(),
        )
    }
}

/// Ring containing `dist_m`: 0 inside the first radius, `radii.len()`
/// beyond the last. A distance equal to a radius belongs to the inner ring.
pub fn ring_index(dist_m: f64, radii: &[f64]) -> Result<usize> {
    if radii.is_empty() {
        return invalid("ring radii must not be empty");
    }
    if !(dist_m >= 0.0) {
        return invalid("distance must be non-negative");
    }
    Ok(ring_index_unchecked(dist_m, radii))
}

fn ring_index_unchecked(dist_m: f64, radii: &[f64]) -> usize {
    radii
        .iter()
        .position(|r| dist_m <= *r)
        .unwrap_or(radii.len())
}

/// Femtocell density over the block footprint, for reporting.
pub fn density_fbs_per_km2(scenario: &Scenario) -> f64 {
    scenario.config.density_fbs_per_km2(scenario.num_femto())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_block_geometry() {
        let cfg = ScenarioConfig::default();
        let s = build_scenario(&cfg, 10).unwrap();
        assert_eq!(s.num_femto(), 10);
        assert_eq!(s.channel.size(), 11);
        let mut aps = s.apartment.clone();
        aps.sort_unstable();
        assert_eq!(aps, (0..10).collect::<Vec<_>>());
        for k in 1..=10 {
            let d = s.fbs[k - 1].distance(&s.fue[k - 1]);
            assert!(d <= cfg.fue_max_dist_m + 1e-12 && d >= cfg.fue_min_dist_m - 1e-12);
            for j in 1..=10 {
                if j != k && s.strip[j - 1] == s.strip[k - 1] {
                    let sep = s.fbs[j - 1].distance(&s.fbs[k - 1]);
                    let steps = sep / 10.0;
                    assert!((steps - math::round(steps)).abs() < 1e-9 && sep >= 10.0 - 1e-9);
                }
            }
        }
        // MUE sits between the strips
        let xs: Vec<f64> = s.fbs.iter().map(|p| p.x).collect();
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(s.mue.x > lo && s.mue.x < hi);
        assert!((s.mue.distance(&s.mbs) - 350.0).abs() < 1e-12);
    }

    #[test]
    fn adjacent_apartments_in_a_strip_are_ten_metres_apart() {
        let cfg = ScenarioConfig::default();
        let (a, sa) = cfg.apartment_center(0);
        let (b, sb) = cfg.apartment_center(1);
        assert_eq!(sa, sb);
        assert!((a.distance(&b) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn single_femto() {
        let s = build_scenario(&ScenarioConfig::default(), 1).unwrap();
        assert_eq!(s.channel.size(), 2);
    }

    #[test]
    fn k_out_of_range() {
        let cfg = ScenarioConfig::default();
        assert!(build_scenario(&cfg, 0).is_err());
        assert!(build_scenario(&cfg, 11).is_err());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let cfg = ScenarioConfig {
            seed: 42,
            ..ScenarioConfig::default()
        };
        assert_eq!(
            build_scenario(&cfg, 7).unwrap(),
            build_scenario(&cfg, 7).unwrap()
        );
        let other = ScenarioConfig {
            seed: 43,
            ..ScenarioConfig::default()
        };
        assert_ne!(
            build_scenario(&cfg, 7).unwrap(),
            build_scenario(&other, 7).unwrap()
        );
    }

    #[test]
    fn incremental_deployment_keeps_positions() {
        let cfg = ScenarioConfig {
            seed: 9,
            ..ScenarioConfig::default()
        };
        let small = build_scenario(&cfg, 3).unwrap();
        let big = build_scenario(&cfg, 10).unwrap();
        assert_eq!(small.fbs[..], big.fbs[..3]);
        assert_eq!(small.fue[..], big.fue[..3]);
        for tx in 0..4 {
            for rx in 0..4 {
                assert_eq!(small.channel.gain(tx, rx), big.channel.gain(tx, rx));
            }
        }
    }

    #[test]
    fn ring_rule() {
        let radii = [17.5, 22.5, 45.0];
        assert_eq!(ring_index(10.0, &radii).unwrap(), 0);
        assert_eq!(ring_index(20.0, &radii).unwrap(), 1);
        assert_eq!(ring_index(100.0, &radii).unwrap(), 3);
        assert_eq!(ring_index(17.5, &radii).unwrap(), 0);
        assert_eq!(ring_index(45.0, &radii).unwrap(), 2);
        assert!(ring_index(1.0, &[]).is_err());
    }

    #[test]
    fn default_block_is_inside_the_outer_mbs_ring() {
        for seed in 0..5 {
            let cfg = ScenarioConfig {
                seed,
                ..ScenarioConfig::default()
            };
            let s = build_scenario(&cfg, 10).unwrap();
            for k in 1..=10 {
                assert!(s.fbs_mbs_distance(k) <= 400.0);
                assert!(s.mbs_ring(k) < 3);
            }
        }
    }

    #[test]
    fn density_range() {
        let cfg = ScenarioConfig::default();
        let d1 = density_fbs_per_km2(&build_scenario(&cfg, 1).unwrap());
        let d10 = density_fbs_per_km2(&build_scenario(&cfg, 10).unwrap());
        assert!((d1 / 600.0 - 1.0).abs() < 0.15, "{d1}");
        assert!((d10 / 6000.0 - 1.0).abs() < 0.15, "{d10}");
        assert!((d10 / d1 - 10.0).abs() < 1e-9);
        assert_eq!(cfg.density_fbs_per_km2(0), 0.0);
    }

    #[test]
    fn link_kinds() {
        let s = build_scenario(&ScenarioConfig::default(), 10).unwrap();
        assert_eq!(s.link_kind(0, 0), LinkKind::MbsToMue);
        assert_eq!(s.link_kind(0, 3), LinkKind::MbsToFue);
        assert_eq!(s.link_kind(3, 0), LinkKind::FbsToFueOtherStrip);
        for j in 1..=10 {
            for k in 1..=10 {
                let same = s.strip[j - 1] == s.strip[k - 1];
                let kind = s.link_kind(j, k);
                assert_eq!(kind == LinkKind::FbsToFueSameStrip, same);
            }
        }
    }
}
