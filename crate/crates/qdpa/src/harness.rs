//! Multi-seed runs, configuration comparison and output files.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qdpa_core::baselines::{check_budget, exhaustive_search_range, merge_results};
use qdpa_core::complexity::{theoretical_budget, TrainingBudget};
use qdpa_core::protocol::{run_incremental_seed, SeedRun};
use qdpa_core::reward::reward_surface;
use qdpa_core::topology::build_scenario;
use qdpa_core::{
    ActionSet, LearningMode, Method, MetricsRecord, RewardSpec, Scenario, SolveResult, StateModel,
};

use crate::config::RunConfig;
use crate::io::{write_json, write_metrics_csv, write_powers_csv, write_qtable, ScenarioDocument};
use crate::stats::{mean_ci, MeanCi};

/// All seeds of one configuration.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub runs: Vec<SeedRun>,
}

impl RunOutput {
    /// Records of every seed, seeds in config order.
    pub fn records(&self) -> Vec<MetricsRecord> {
        self.runs
            .iter()
            .flat_map(|r| r.records.iter().cloned())
            .collect()
    }

    /// Values of `metric` at `k` for `method`, one per seed in seed order.
    pub fn series(
        &self,
        method: Method,
        k: usize,
        metric: impl Fn(&MetricsRecord) -> f64,
    ) -> Vec<f64> {
        self.runs
            .iter()
            .filter_map(|r| {
                r.records
                    .iter()
                    .find(|x| x.method == method && x.k_active == k)
            })
            .map(metric)
            .collect()
    }
}

/// Runs the incremental protocol for every seed; seeds run in parallel.
pub fn run_incremental(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let spec = cfg.run_spec();
    let runs = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_incremental_seed(&spec, seed).with_context(|| format!("seed {seed}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutput {
        config: cfg.clone(),
        runs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub method: String,
    pub k_active: usize,
    pub mue_rate: MeanCi,
    pub fue_sum_rate: MeanCi,
    pub fbs_sum_power_mw: MeanCi,
    pub mue_ok_frac: f64,
    pub fue_ok_frac: MeanCi,
    pub cl_messages: MeanCi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub state_model: String,
    pub reward_kind: String,
    pub learning_mode: String,
    pub seeds: usize,
    pub training_frames: usize,
    pub frame_time_ms: f64,
    /// Wall-clock equivalent of one FBS training period.
    pub training_time_s: f64,
    /// Budget for `ε = (1 - optimality) V_max` on the seed-0 geometry at `k_max`.
    pub theoretical: Option<TrainingBudget>,
    pub optimality: f64,
    pub exhaustive_skipped: BTreeMap<u64, Vec<usize>>,
    pub series: Vec<SeriesPoint>,
}

fn method_order(m: &Method) -> u8 {
    match m {
        Method::QDpa(LearningMode::Independent) => 0,
        Method::QDpa(LearningMode::Cooperative) => 1,
        Method::Greedy => 2,
        Method::Exhaustive => 3,
    }
}

pub fn summarize(out: &RunOutput) -> Summary {
    let cfg = &out.config;
    let mut keys: Vec<(Method, usize)> = Vec::new();
    for r in out.runs.iter().flat_map(|r| &r.records) {
        if !keys.contains(&(r.method, r.k_active)) {
            keys.push((r.method, r.k_active));
        }
    }
    keys.sort_by_key(|(m, k)| (method_order(m), *k));
    let series = keys
        .into_iter()
        .map(|(method, k)| {
            let get = |f: fn(&MetricsRecord) -> f64| mean_ci(&out.series(method, k, f));
            let ok = out.series(method, k, |r| if r.mue_ok { 1.0 } else { 0.0 });
            SeriesPoint {
                method: method.name().to_string(),
                k_active: k,
                mue_rate: get(|r| r.mue_rate),
                fue_sum_rate: get(|r| r.fue_sum_rate),
                fbs_sum_power_mw: get(|r| r.fbs_sum_power_mw),
                mue_ok_frac: ok.iter().sum::<f64>() / ok.len().max(1) as f64,
                fue_ok_frac: get(|r| r.fue_ok_frac),
                cl_messages: get(|r| r.cl_messages as f64),
            }
        })
        .collect();
    let theoretical = out.runs.first().and_then(|r| {
        theoretical_budget(
            &r.scenario,
            &cfg.reward,
            cfg.state_model,
            cfg.learning.beta,
            cfg.optimality,
            cfg.confidence_delta,
        )
        .ok()
    });
    Summary {
        state_model: cfg.state_model.name().to_string(),
        reward_kind: cfg.reward.kind.name().to_string(),
        learning_mode: cfg.learning.mode.name().to_string(),
        seeds: out.runs.len(),
        training_frames: cfg.learning.training_frames,
        frame_time_ms: cfg.frame_time_ms,
        training_time_s: cfg.learning.training_frames as f64 * cfg.frame_time_ms * 1e-3,
        theoretical,
        optimality: cfg.optimality,
        exhaustive_skipped: out
            .runs
            .iter()
            .filter(|r| !r.exhaustive_skipped.is_empty())
            .map(|r| (r.seed, r.exhaustive_skipped.clone()))
            .collect(),
        series,
    }
}

/// Writes `metrics.csv`, `powers.csv`, `config.json`, `summary.json`,
/// the per-seed scenario documents and the per-agent Q-tables.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<Summary> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let records = out.records();
    write_metrics_csv(&dir.join("metrics.csv"), &records)?;
    write_powers_csv(&dir.join("powers.csv"), &records)?;
    write_json(&dir.join("config.json"), &out.config)?;
    let summary = summarize(out);
    write_json(&dir.join("summary.json"), &summary)?;
    let qdir = dir.join("qtables");
    let sdir = dir.join("scenarios");
    std::fs::create_dir_all(&qdir).with_context(|| format!("creating {}", qdir.display()))?;
    std::fs::create_dir_all(&sdir).with_context(|| format!("creating {}", sdir.display()))?;
    for run in &out.runs {
        ScenarioDocument::new(&run.scenario).save(&sdir.join(format!("seed{}.json", run.seed)))?;
        for (i, q) in run.tables.iter().enumerate() {
            write_qtable(&qdir, &format!("seed{}_fbs{}", run.seed, i + 1), q)?;
        }
    }
    Ok(summary)
}

/// The four learning configurations compared side by side.
pub const CONFIGURATIONS: [(LearningMode, StateModel); 4] = [
    (LearningMode::Independent, StateModel::FueStatus),
    (LearningMode::Cooperative, StateModel::FueStatus),
    (LearningMode::Independent, StateModel::MueStatus),
    (LearningMode::Cooperative, StateModel::MueStatus),
];

pub fn configuration_label(mode: LearningMode, model: StateModel) -> String {
    format!("{}+{}", mode.name().to_uppercase(), model.name())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationRow {
    pub label: String,
    pub k_active: usize,
    pub fbs_sum_power_mw: f64,
    pub fue_sum_rate: f64,
    pub mue_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub label: String,
    /// Rank 1 is the lowest power.
    pub fbs_sum_power: usize,
    /// Rank 1 is the highest rate.
    pub fue_sum_rate: usize,
    pub mue_rate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub k_rank: usize,
    pub rows: Vec<ConfigurationRow>,
    pub ranks: Vec<RankRow>,
}

/// Competition ranking: equal values share a rank.
pub fn competition_ranks(values: &[f64], higher_is_better: bool) -> Vec<usize> {
    values
        .iter()
        .map(|v| {
            1 + values
                .iter()
                .filter(|w| if higher_is_better { *w > v } else { *w < v })
                .count()
        })
        .collect()
}

/// Ranks seed-averaged metrics of labelled runs at `k`.
pub fn rank_outputs(outputs: &[(String, RunOutput)], k: usize) -> Comparison {
    let mut rows = Vec::new();
    for (label, out) in outputs {
        let method = Method::QDpa(out.config.learning.mode);
        for kk in 1..=out.config.k_max {
            let m = |f: fn(&MetricsRecord) -> f64| mean_ci(&out.series(method, kk, f)).mean;
            rows.push(ConfigurationRow {
                label: label.clone(),
                k_active: kk,
                fbs_sum_power_mw: m(|r| r.fbs_sum_power_mw),
                fue_sum_rate: m(|r| r.fue_sum_rate),
                mue_rate: m(|r| r.mue_rate),
            });
        }
    }
    let at_k: Vec<&ConfigurationRow> = outputs
        .iter()
        .filter_map(|(label, _)| rows.iter().find(|r| &r.label == label && r.k_active == k))
        .collect();
    let col = |f: fn(&ConfigurationRow) -> f64| at_k.iter().map(|r| f(r)).collect::<Vec<_>>();
    let p = competition_ranks(&col(|r| r.fbs_sum_power_mw), false);
    let fr = competition_ranks(&col(|r| r.fue_sum_rate), true);
    let mr = competition_ranks(&col(|r| r.mue_rate), true);
    let ranks = at_k
        .iter()
        .enumerate()
        .map(|(i, r)| RankRow {
            label: r.label.clone(),
            fbs_sum_power: p[i],
            fue_sum_rate: fr[i],
            mue_rate: mr[i],
        })
        .collect();
    Comparison {
        k_rank: k,
        rows,
        ranks,
    }
}

/// Runs the four learning configurations on identical scenarios and seeds.
pub fn compare_configurations(
    template: &RunConfig,
) -> Result<(Vec<(String, RunOutput)>, Comparison)> {
    let outputs = CONFIGURATIONS
        .iter()
        .map(|&(mode, model)| {
            let mut cfg = template.clone();
            cfg.learning.mode = mode;
            cfg.state_model = model;
            cfg.baselines.greedy = false;
            cfg.baselines.exhaustive = false;
            Ok((configuration_label(mode, model), run_incremental(&cfg)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let cmp = rank_outputs(&outputs, template.k_max);
    Ok((outputs, cmp))
}

pub fn write_comparison(cmp: &Comparison, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("comparison.csv");
    let mut w =
        csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    for r in &cmp.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    write_json(&dir.join("ranks.json"), cmp)
}

pub fn format_rank_table(cmp: &Comparison) -> String {
    let mut s = format!(
        "ranks at K={}\n{:<10} {:>8} {:>8} {:>8}\n",
        cmp.k_rank, "config", "sum_p", "sum_rk", "r0"
    );
    for r in &cmp.ranks {
        s.push_str(&format!(
            "{:<10} {:>8} {:>8} {:>8}\n",
            r.label, r.fbs_sum_power, r.fue_sum_rate, r.mue_rate
        ));
    }
    s
}

/// Exhaustive search split over disjoint rank ranges on the rayon pool.
pub fn parallel_exhaustive(
    scenario: &Scenario,
    actions: &ActionSet,
    max_joint: u64,
) -> Result<SolveResult> {
    let total = check_budget(scenario, actions, max_joint)?;
    let chunk = (total / (4 * rayon::current_num_threads() as u64).max(1)).max(1);
    let starts: Vec<u64> = (0..total).step_by(chunk as usize).collect();
    let result = starts
        .into_par_iter()
        .map(|s| exhaustive_search_range(scenario, actions, s, (s + chunk).min(total)))
        .reduce_with(merge_results)
        .expect("grid has at least one vector");
    Ok(result)
}

/// Reward grid as CSV text with columns `r0,rk,reward`.
pub fn reward_surface_csv(
    spec: &RewardSpec,
    gamma0: f64,
    gammak: f64,
    dist_m: f64,
    r0_max: f64,
    rk_max: f64,
    steps: usize,
) -> Result<String> {
    spec.validate()?;
    let grid = reward_surface(spec, gamma0, gammak, dist_m, r0_max, rk_max, steps);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["r0", "rk", "reward"])?;
    for (r0, rk, v) in grid {
        w.write_record([r0.to_string(), rk.to_string(), v.to_string()])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Scenario with `k` active femtocells for the config's first seed.
pub fn scenario_for(cfg: &RunConfig, k: usize) -> Result<Scenario> {
    let mut sc = cfg.scenario.clone();
    sc.seed = cfg.seeds.first().copied().unwrap_or(sc.seed);
    Ok(build_scenario(&sc, k)?)
}
