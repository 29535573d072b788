//! Incremental deployment: femtocells join one at a time, the newcomer
//! trains its Q-table over a fixed number of frames while the others act
//! greedily on their frozen tables, then the network is measured.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{self, DEFAULT_MAX_JOINT};
use crate::channel::{self, rate};
use crate::error::{invalid, Error, Result};
use crate::learning::{select_action, target_cl, LearningConfig, LearningMode, QContext, QTable};
use crate::mdp::{action_set, observe_state, ActionSet, StateModel, StateSpace};
use crate::reward::{RewardInputs, RewardKind, RewardSpec};
use crate::topology::{build_scenario, Scenario, ScenarioConfig};

/// Everything that defines one deployment run except the seed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct RunSpec {
    pub scenario: ScenarioConfig,
    pub learning: LearningConfig,
    pub state_model: StateModel,
    pub reward: RewardSpec,
    pub k_max: usize,
    pub greedy_baseline: bool,
    pub exhaustive_baseline: bool,
    pub exhaustive_budget: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            learning: LearningConfig::default(),
            state_model: StateModel::FueStatus,
            reward: RewardSpec::default(),
            k_max: 10,
            greedy_baseline: false,
            exhaustive_baseline: false,
            exhaustive_budget: DEFAULT_MAX_JOINT,
        }
    }
}

impl RunSpec {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.learning.validate()?;
        self.reward.validate()?;
        if self.k_max == 0 || self.k_max > self.scenario.num_apartments() {
            return invalid(alloc::format!(
                "k_max must be in 1..={}, got {}",
                self.scenario.num_apartments(),
                self.k_max
            ));
        }
        Ok(())
    }
}

/// How the powers of a record were chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    QDpa(LearningMode),
    Greedy,
    Exhaustive,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::QDpa(LearningMode::Independent) => "qdpa-il",
            Method::QDpa(LearningMode::Cooperative) => "qdpa-cl",
            Method::Greedy => "greedy",
            Method::Exhaustive => "exhaustive",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "qdpa-il" => Method::QDpa(LearningMode::Independent),
            "qdpa-cl" => Method::QDpa(LearningMode::Cooperative),
            "greedy" => Method::Greedy,
            "exhaustive" => Method::Exhaustive,
            _ => return None,
        })
    }
}

/// Steady-state network metrics for one `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub seed: u64,
    pub k_active: usize,
    pub method: Method,
    pub state_model: StateModel,
    pub reward_kind: RewardKind,
    pub mue_rate: f64,
    pub fue_sum_rate: f64,
    pub fbs_sum_power_mw: f64,
    pub mue_ok: bool,
    pub fue_ok_frac: f64,
    /// Q-rows received over the backhaul while the newest FBS trained.
    pub cl_messages: u64,
    /// Femto powers in watts, FBS 1 first.
    pub powers_w: Vec<f64>,
}

impl MetricsRecord {
    /// Measures the network at the given femto powers.
    pub fn measure(
        scenario: &Scenario,
        powers_w: &[f64],
        seed: u64,
        method: Method,
        spec: &RunSpec,
    ) -> Self {
        let sinrs = scenario.sinrs(powers_w);
        let gammak = scenario.config.gammak();
        let k = powers_w.len();
        let ok = sinrs[1..].iter().filter(|g| **g >= gammak).count();
        Self {
            seed,
            k_active: k,
            method,
            state_model: spec.state_model,
            reward_kind: spec.reward.kind,
            mue_rate: rate(sinrs[0]),
            fue_sum_rate: sinrs[1..].iter().map(|g| rate(*g)).sum(),
            fbs_sum_power_mw: powers_w.iter().sum::<f64>() * 1e3,
            mue_ok: sinrs[0] >= scenario.config.gamma0(),
            fue_ok_frac: if k == 0 { 1.0 } else { ok as f64 / k as f64 },
            cl_messages: 0,
            powers_w: powers_w.to_vec(),
        }
    }
}

/// Per-frame record of one training run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub states: Vec<usize>,
    pub cl_messages: u64,
}

/// Live network: the active femtocells, their tables and current powers.
#[derive(Debug, Clone)]
pub struct Deployment {
    spec: RunSpec,
    actions: ActionSet,
    space: StateSpace,
    scenario: Option<Scenario>,
    tables: Vec<QTable>,
    levels: Vec<usize>,
    /// Location part of each agent's state, fixed for its lifetime.
    rings: Vec<(usize, usize)>,
    last_states: Option<Vec<usize>>,
}

impl Deployment {
    pub fn new(spec: &RunSpec) -> Result<Self> {
        spec.validate()?;
        let cfg = &spec.scenario;
        let actions = action_set(cfg.fbs_pmin_dbm, cfg.fbs_pmax_dbm, cfg.fbs_step_db)?;
        let space = StateSpace::new(
            spec.state_model,
            cfg.ring_radii_mue_m.len(),
            cfg.ring_radii_mbs_m.len(),
        )?;
        Ok(Self {
            spec: spec.clone(),
            actions,
            space,
            scenario: None,
            tables: Vec::new(),
            levels: Vec::new(),
            rings: Vec::new(),
            last_states: None,
        })
    }

    pub fn k_active(&self) -> usize {
        self.tables.len()
    }

    pub fn scenario(&self) -> Option<&Scenario> {
        self.scenario.as_ref()
    }

    pub fn tables(&self) -> &[QTable] {
        &self.tables
    }

    pub fn actions(&self) -> &ActionSet {
        &self.actions
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Brings the next femtocell of the activation order online with a
    /// zero table at the lowest power level.
    pub fn activate_next(&mut self) -> Result<usize> {
        let k = self.k_active() + 1;
        if k > self.spec.k_max {
            return invalid("all femtocells of the run are already active");
        }
        let scenario = build_scenario(&self.spec.scenario, k)?;
        self.rings
            .push((scenario.mue_ring(k), scenario.mbs_ring(k)));
        self.scenario = Some(scenario);
        self.tables
            .push(QTable::new(self.space.len(), self.actions.len()));
        self.levels.push(0);
        Ok(k)
    }

    fn powers(&self) -> Vec<f64> {
        self.levels.iter().map(|a| self.actions.watts(*a)).collect()
    }

    fn observe_all(&self, scenario: &Scenario, sinrs: &[f64]) -> Vec<usize> {
        (1..=self.k_active())
            .map(|k| {
                let st = observe_state(k, sinrs[k], sinrs[0], scenario, self.space.model);
                debug_assert_eq!((st.mue_ring, st.mbs_ring), self.rings[k - 1]);
                self.space.index(&st)
            })
            .collect()
    }

    fn sharing<'t>(tables: &'t [QTable], states: &[usize], state: usize) -> Vec<&'t QTable> {
        tables
            .iter()
            .zip(states)
            .filter(|(_, s)| **s == state)
            .map(|(t, _)| t)
            .collect()
    }

    fn greedy_action(&self, agent: usize, states: &[usize]) -> usize {
        let s = states[agent];
        match self.spec.learning.mode {
            LearningMode::Independent => QContext::Independent(&self.tables[agent]).greedy(s),
            LearningMode::Cooperative => {
                let shared = Self::sharing(&self.tables, states, s);
                QContext::Cooperative(&shared).greedy(s)
            }
        }
    }

    /// Trains the newest femtocell for `frames` frames; every other agent
    /// acts greedily on its frozen table.
    pub fn train_newest<R: Rng + ?Sized>(
        &mut self,
        frames: usize,
        rng: &mut R,
    ) -> Result<TrainingTrace> {
        let Some(scenario) = self.scenario.take() else {
            return invalid("no active femtocell to train");
        };
        let trace = self.train_on(&scenario, frames, rng);
        self.scenario = Some(scenario);
        Ok(trace)
    }

    fn train_on<R: Rng + ?Sized>(
        &mut self,
        scenario: &Scenario,
        frames: usize,
        rng: &mut R,
    ) -> TrainingTrace {
        let k = self.k_active();
        let learner = k - 1;
        let cfg = self.spec.learning;
        let gamma0 = scenario.config.gamma0();
        let gammak = scenario.config.gammak();
        let dist = scenario.fbs_mue_distance(k);
        let rows_per_frame = (self.space.reachable_rows() * (k - 1)) as u64;

        self.levels[learner] = 0;
        let mut states = self.observe_all(scenario, &scenario.sinrs(&self.powers()));
        let mut trace = TrainingTrace {
            actions: Vec::with_capacity(frames),
            rewards: Vec::with_capacity(frames),
            states: Vec::with_capacity(frames),
            cl_messages: 0,
        };

        for _ in 0..frames {
            for j in 0..learner {
                self.levels[j] = self.greedy_action(j, &states);
            }
            let s = states[learner];
            let a = match cfg.mode {
                LearningMode::Independent => select_action(
                    &QContext::Independent(&self.tables[learner]),
                    s,
                    cfg.epsilon_explore,
                    rng,
                ),
                LearningMode::Cooperative => {
                    let shared = Self::sharing(&self.tables, &states, s);
                    select_action(&QContext::Cooperative(&shared), s, cfg.epsilon_explore, rng)
                }
            };
            self.levels[learner] = a;

            let sinrs = scenario.sinrs(&self.powers());
            let reward = self.spec.reward.evaluate(&RewardInputs {
                r0: rate(sinrs[0]),
                rk: rate(sinrs[k]),
                gamma0,
                gammak,
                fbs_mue_dist_m: dist,
            });
            let next = self.observe_all(scenario, &sinrs);
            let s_next = next[learner];
            let target = match cfg.mode {
                LearningMode::Independent => self.tables[learner].greedy(s_next).1,
                LearningMode::Cooperative => {
                    trace.cl_messages += rows_per_frame;
                    let shared = Self::sharing(&self.tables, &next, s_next);
                    let (_, best) =
                        target_cl(&shared, s_next).expect("learner shares its own state");
                    self.tables[learner].value(s_next, best)
                }
            };
            self.tables[learner].update(s, a, reward, target, cfg.beta);

            trace.actions.push(a);
            trace.rewards.push(reward);
            trace.states.push(s);
            states = next;
        }
        self.last_states = Some(states);
        trace
    }

    /// One greedy frame with every agent acting on its table, starting
    /// from the states left by the last training frame.
    pub fn evaluate(&mut self) -> Result<Vec<f64>> {
        let Some(scenario) = self.scenario.as_ref() else {
            return invalid("no active femtocell to evaluate");
        };
        let states = match self.last_states.take() {
            Some(s) if s.len() == self.k_active() => s,
            _ => self.observe_all(scenario, &scenario.sinrs(&self.powers())),
        };
        let levels: Vec<usize> = (0..self.k_active())
            .map(|j| self.greedy_action(j, &states))
            .collect();
        self.levels = levels;
        Ok(self.powers())
    }
}

/// Output of one seed of an incremental run.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub records: Vec<MetricsRecord>,
    pub tables: Vec<QTable>,
    pub scenario: Scenario,
    /// `K` values where the exhaustive baseline exceeded its budget.
    pub exhaustive_skipped: Vec<usize>,
}

/// Random stream used for exploration; the scenario uses the seed directly.
pub fn learning_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Runs the incremental deployment protocol for one seed: for each
/// `K = 1..=k_max` the K-th femtocell joins, trains, and the network is
/// measured with all agents greedy. Baselines are measured on the same
/// geometry.
pub fn run_incremental_seed(spec: &RunSpec, seed: u64) -> Result<SeedRun> {
    let mut spec = spec.clone();
    spec.scenario.seed = seed;
    let mut net = Deployment::new(&spec)?;
    let mut rng = learning_rng(seed);
    let mut records = Vec::new();
    let mut skipped = Vec::new();

    for _ in 0..spec.k_max {
        let k = net.activate_next()?;
        let trace = net.train_newest(spec.learning.training_frames, &mut rng)?;
        let powers = net.evaluate()?;
        let scenario = net.scenario().expect("activated");
        let mut rec = MetricsRecord::measure(
            scenario,
            &powers,
            seed,
            Method::QDpa(spec.learning.mode),
            &spec,
        );
        rec.cl_messages = trace.cl_messages;
        records.push(rec);

        if spec.greedy_baseline {
            let p = baselines::greedy_powers(k, net.actions());
            records.push(MetricsRecord::measure(
                scenario,
                &p,
                seed,
                Method::Greedy,
                &spec,
            ));
        }
        if spec.exhaustive_baseline {
            match baselines::exhaustive_search(scenario, net.actions(), spec.exhaustive_budget) {
                Ok(sol) => records.push(MetricsRecord::measure(
                    scenario,
                    &sol.best_powers,
                    seed,
                    Method::Exhaustive,
                    &spec,
                )),
                Err(Error::BudgetExceeded { required, budget }) => {
                    log::warn!(
                        "seed {seed}, K={k}: exhaustive search skipped ({required} > {budget})"
                    );
                    skipped.push(k);
                }
                Err(e) => return Err(e),
            }
        }
    }
    let scenario = net.scenario().expect("k_max >= 1").clone();
    Ok(SeedRun {
        seed,
        records,
        tables: net.tables,
        scenario,
        exhaustive_skipped: skipped,
    })
}

/// Sum rate and feasibility of a record, recomputed from its powers.
pub fn recompute(scenario: &Scenario, rec: &MetricsRecord) -> (f64, f64) {
    let sinrs = channel::all_sinrs(
        scenario.mbs_power_watts(),
        &rec.powers_w,
        &scenario.channel,
        scenario.noise_watts(),
    );
    (rate(sinrs[0]), sinrs[1..].iter().map(|g| rate(*g)).sum())
}
