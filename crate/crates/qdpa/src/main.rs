use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qdpa::harness::{
    compare_configurations, format_rank_table, parallel_exhaustive, reward_surface_csv,
    run_incremental, scenario_for, write_comparison, write_outputs,
};
use qdpa::io::{write_json, ScenarioDocument};
use qdpa::RunConfig;
use qdpa_core::complexity::{
    epsilon_bound, min_iterations, training_length, v_max, ComplexityInputs,
};
use qdpa_core::mdp::action_set;
use qdpa_core::{RewardKind, RewardSpec};

#[derive(Parser)]
#[command(
    name = "qdpa",
    version,
    about = "Femtocell power allocation with multi-agent Q-learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Incremental deployment run with one learning configuration.
    Train(RunArgs),
    /// The four learning configurations on identical seeds, with a rank table.
    Sweep(RunArgs),
    /// Exhaustive search on a scenario document.
    Oracle {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = qdpa_core::baselines::DEFAULT_MAX_JOINT)]
        budget: u64,
        /// Write the result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample-complexity numbers as JSON.
    Complexity {
        #[arg(long)]
        rmax: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        states: u64,
        #[arg(long)]
        actions: u64,
        /// Iteration count for the error bound; defaults to the minimum count.
        #[arg(long)]
        t: Option<u64>,
    },
    /// Reward values on an (r0, rk) grid as CSV.
    RewardSurface {
        #[arg(long, value_enum, default_value_t = KindArg::Proposed)]
        kind: KindArg,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 0.0)]
        bias: f64,
        /// FBS-to-MUE distance for the proximity reward.
        #[arg(long, default_value_t = 20.0)]
        dist: f64,
        #[arg(long, default_value_t = 8.0)]
        r0_max: f64,
        #[arg(long, default_value_t = 4.0)]
        rk_max: f64,
        #[arg(long, default_value_t = 41)]
        steps: usize,
        /// Take the thresholds from this run config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Run this single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Training frames per joining FBS.
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Proposed,
    Quadratic,
    Exponential,
    Proximity,
}

impl From<KindArg> for RewardKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Proposed => RewardKind::Proposed,
            KindArg::Quadratic => RewardKind::Quadratic,
            KindArg::Exponential => RewardKind::Exponential,
            KindArg::Proximity => RewardKind::Proximity,
        }
    }
}

fn load_run_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(k) = args.k_max {
        cfg.k_max = k;
    }
    if let Some(l) = args.frames {
        cfg.learning.training_frames = l;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ComplexityReport {
    v_max: f64,
    min_iterations: u64,
    training_length: u64,
    t: u64,
    epsilon_bound: f64,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let cfg = load_run_config(&args)?;
            let out = run_incremental(&cfg)?;
            let summary = write_outputs(&out, &cfg.output_dir)?;
            if let Some(b) = &summary.theoretical {
                log::info!(
                    "theoretical budget: T={} per pair, L={} frames; practical L={}",
                    b.iterations,
                    b.frames,
                    cfg.learning.training_frames
                );
            }
            println!("wrote {}", cfg.output_dir.display());
        }
        Command::Sweep(args) => {
            let cfg = load_run_config(&args)?;
            let (outputs, cmp) = compare_configurations(&cfg)?;
            for (label, out) in &outputs {
                write_outputs(out, &cfg.output_dir.join(label))?;
            }
            write_comparison(&cmp, &cfg.output_dir)?;
            print!("{}", format_rank_table(&cmp));
        }
        Command::Oracle {
            scenario,
            budget,
            out,
        } => {
            let doc = ScenarioDocument::load(&scenario)?;
            let c = &doc.scenario.config;
            let actions = action_set(c.fbs_pmin_dbm, c.fbs_pmax_dbm, c.fbs_step_db)?;
            let result = parallel_exhaustive(&doc.scenario, &actions, budget)?;
            match out {
                Some(p) => write_json(&p, &result)?,
                None => println!("{}", serde_json::to_string_pretty(&result)?),
            }
        }
        Command::Complexity {
            rmax,
            beta,
            eps,
            delta,
            states,
            actions,
            t,
        } => {
            let t_min = min_iterations(rmax, beta, eps, delta, states, actions)?;
            let t = t.unwrap_or(t_min);
            let inputs = ComplexityInputs {
                r_max: rmax,
                beta,
                epsilon: eps,
                delta,
                x_card: states,
                a_card: actions,
                t,
            };
            let report = ComplexityReport {
                v_max: v_max(rmax, beta),
                min_iterations: t_min,
                training_length: training_length(t_min, states, actions),
                t,
                epsilon_bound: epsilon_bound(&inputs)?,
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::RewardSurface {
            kind,
            m,
            bias,
            dist,
            r0_max,
            rk_max,
            steps,
            config,
            out,
        } => {
            let (g0, gk) = match &config {
                Some(p) => {
                    let cfg = RunConfig::load(p)?;
                    let s = scenario_for(&cfg, 1)?;
                    (s.config.gamma0(), s.config.gammak())
                }
                None => {
                    let d = qdpa_core::ScenarioConfig::default();
                    (d.gamma0(), d.gammak())
                }
            };
            let spec = RewardSpec {
                kind: kind.into(),
                m,
                bias_c: bias,
                ..RewardSpec::default()
            };
            let csv = reward_surface_csv(&spec, g0, gk, dist, r0_max, rk_max, steps)?;
            emit(out.as_deref(), &csv)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
