//! Experiment configuration, multi-seed runs with exact regret, aggregation
//! and export.

mod export;
mod stats;
mod table2;

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use export::{export_results, import_results, write_records, Format};
pub use stats::{aggregate, mean_stderr, welch_t, Summary, WelchT};
pub use table2::{base_stock_costs, best_base_stock, default_algorithms, table2_row, LearnerRow, ScenarioRow};

use crate::algorithms::{make_learner, AlgoConfig};
use crate::dp::{dp_solve, policy_value};
use crate::environments::{EnvConfig, Environment};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rng::{stream, Purpose};
use crate::rollout::{rollout_episode, ObservationMode};

/// Seeds used when a config lists none.
pub const DEFAULT_SEEDS: std::ops::Range<u64> = 0..100;
/// Smaller seed set for quick runs.
pub const CI_SEEDS: std::ops::Range<u64> = 0..20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// A full environment object, or a preset name such as `"scenario_1"`.
    #[serde(deserialize_with = "env_or_preset")]
    pub environment: EnvConfig,
    pub algorithm: AlgoConfig,
    pub episodes: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_mode")]
    pub observation: ObservationMode,
    #[serde(default)]
    pub output: Option<OutputConfig>,
    /// How seeds are spread over workers.
    #[serde(default)]
    pub exec: Exec,
}

fn env_or_preset<'de, D: serde::Deserializer<'de>>(de: D) -> std::result::Result<EnvConfig, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Name(String),
        Full(EnvConfig),
    }
    match Raw::deserialize(de)? {
        Raw::Name(name) => EnvConfig::preset(&name).map_err(serde::de::Error::custom),
        Raw::Full(env) => Ok(env),
    }
}

fn default_seeds() -> Vec<u64> {
    DEFAULT_SEEDS.collect()
}

fn default_mode() -> ObservationMode {
    ObservationMode::Full
}

impl ExperimentConfig {
    pub fn new(environment: EnvConfig, algorithm: AlgoConfig, episodes: usize, seeds: Vec<u64>) -> Self {
        Self {
            environment,
            algorithm,
            episodes,
            seeds,
            observation: ObservationMode::Full,
            output: None,
            exec: Exec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if matches!(self.algorithm, AlgoConfig::PlugIn {}) && self.observation == ObservationMode::None {
            return Err(Error::ObservationMode { learner: "plug_in" });
        }
        Ok(())
    }
}

/// One episode of one seed, in reported units (cost for inventory).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretRecord {
    pub seed: u64,
    /// 1-based.
    pub episode: usize,
    pub value: f64,
    pub inst_regret: f64,
    pub cum_regret: f64,
    /// Seconds spent in the learner and the rollout; not exported.
    #[serde(skip)]
    pub wall_secs: f64,
}

/// Records of one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub records: Vec<RegretRecord>,
}

impl SeedRun {
    pub fn final_value(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.value)
    }

    pub fn final_regret(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_regret)
    }
}

/// Optimal value and its reported form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub value: f64,
    pub reported: f64,
}

pub fn optimum(env: &Environment) -> Optimum {
    let (_, v) = dp_solve(&env.spec, env.spec.exo_dist());
    let value = v.get(0, env.spec.start_state());
    Optimum {
        value,
        reported: env.report(value),
    }
}

/// Runs one seed against a built environment.
pub fn run_seed(
    env: &Environment,
    opt: Optimum,
    algorithm: &AlgoConfig,
    episodes: usize,
    mode: ObservationMode,
    seed: u64,
) -> Result<SeedRun> {
    let spec = &env.spec;
    let dist = spec.exo_dist();
    let mut learner = make_learner(algorithm, env, episodes, mode)?;
    let mut rng = stream(seed, Purpose::Environment, 0);
    let mut records = Vec::with_capacity(episodes);
    let mut cum = 0.0;
    let mut last: Option<(crate::policy::Policy, f64)> = None;
    for k in 1..=episodes {
        let t0 = Instant::now();
        let pi = learner.policy()?;
        let traj = rollout_episode(spec, &pi, &mut rng, mode);
        learner.observe(&traj)?;
        let wall_secs = t0.elapsed().as_secs_f64();
        let value = match &last {
            Some((prev, v)) if *prev == pi => *v,
            _ => policy_value(spec, dist, &pi)?,
        };
        let inst = env.report_regret(opt.value, value);
        cum += inst;
        records.push(RegretRecord {
            seed,
            episode: k,
            value: env.report(value),
            inst_regret: inst,
            cum_regret: cum,
            wall_secs,
        });
        last = Some((pi, value));
    }
    Ok(SeedRun { seed, records })
}

/// Runs every seed of `cfg`; results are in seed-list order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SeedRun>> {
    cfg.validate()?;
    let env = cfg.environment.build()?;
    cfg.algorithm.check(&env, cfg.observation)?;
    let opt = optimum(&env);
    cfg.exec
        .map(cfg.seeds.len(), |i| {
            run_seed(&env, opt, &cfg.algorithm, cfg.episodes, cfg.observation, cfg.seeds[i])
        })
        .into_iter()
        .collect()
}

/// All records of `runs`, ordered by seed then episode.
pub fn flatten(runs: &[SeedRun]) -> Vec<RegretRecord> {
    let mut out: Vec<RegretRecord> = runs.iter().flat_map(|r| r.records.iter().cloned()).collect();
    out.sort_by_key(|r| (r.seed, r.episode));
    out
}
