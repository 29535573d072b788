//! Run configuration file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use qdpa_core::baselines::DEFAULT_MAX_JOINT;
use qdpa_core::{LearningConfig, RewardSpec, RunSpec, ScenarioConfig, StateModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Baselines {
    pub greedy: bool,
    pub exhaustive: bool,
    /// Largest joint grid the exhaustive search may enumerate.
    pub exhaustive_budget: u64,
}

impl Default for Baselines {
    fn default() -> Self {
        Self {
            greedy: true,
            exhaustive: false,
            exhaustive_budget: DEFAULT_MAX_JOINT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub learning: LearningConfig,
    pub state_model: StateModel,
    pub reward: RewardSpec,
    pub k_max: usize,
    pub seeds: Vec<u64>,
    pub baselines: Baselines,
    pub output_dir: PathBuf,
    /// Frame duration, used only to report training time.
    pub frame_time_ms: f64,
    /// Target fraction of `V_max` for the reported theoretical budget.
    pub optimality: f64,
    /// Failure probability for the reported theoretical budget.
    pub confidence_delta: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            learning: LearningConfig::default(),
            state_model: StateModel::FueStatus,
            reward: RewardSpec::default(),
            k_max: 10,
            seeds: (0..20).collect(),
            baselines: Baselines::default(),
            output_dir: PathBuf::from("out"),
            frame_time_ms: 2.0,
            optimality: 0.9,
            confidence_delta: 0.1,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            bail!("config needs at least one seed");
        }
        if !(self.frame_time_ms >= 0.0) {
            bail!("frame_time_ms must be non-negative");
        }
        self.run_spec().validate()?;
        Ok(())
    }

    /// Per-seed protocol parameters.
    pub fn run_spec(&self) -> RunSpec {
        RunSpec {
            scenario: self.scenario.clone(),
            learning: self.learning,
            state_model: self.state_model,
            reward: self.reward,
            k_max: self.k_max,
            greedy_baseline: self.baselines.greedy,
            exhaustive_baseline: self.baselines.exhaustive,
            exhaustive_budget: self.baselines.exhaustive_budget,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
