//! Online learners.
//!
//! A learner proposes one policy per episode and then sees that episode's
//! trajectory. Learners are built from a copy of the spec whose exogenous law
//! has been replaced, so they can use the known dynamics `f` and `g` but not
//! the law they are meant to learn.

mod base_stock;
mod plug_in;
mod q_learning;
mod ucrl_vtr;

use serde::{Deserialize, Serialize};

pub use base_stock::{BaseStockLearner, BaseStockSearch};
pub use plug_in::{l1_radius, PlugIn, PlugInState};
pub use q_learning::{QLearning, QLearningConfig, QLearningState};
pub use ucrl_vtr::{
    beta_bonuses, refresh_estimates, ucrl_observe, ucrl_plan, Bonuses, LearnerFeatures, Plan, StageStats, UcrlVtr,
    UcrlVtrConfig, UcrlVtrState, Update,
};

use crate::environments::Environment;
use crate::error::{Error, Result};
use crate::model::{ExoDist, ExoMdpSpec, ProbVec};
use crate::policy::{MarkovPolicy, Policy};
use crate::rollout::{ObservationMode, Trajectory};

pub trait Learner: Send {
    /// Policy for the coming episode.
    fn policy(&mut self) -> Result<Policy>;
    /// Feeds back the trajectory produced by the last policy.
    fn observe(&mut self, traj: &Trajectory) -> Result<()>;
}

/// Uniformly random actions; never learns.
pub struct RandomLearner {
    policy: Policy,
}

impl RandomLearner {
    pub fn new(structure: &ExoMdpSpec) -> Self {
        Self {
            policy: MarkovPolicy::uniform(structure.horizon(), structure.n_states(), structure.n_actions()).into(),
        }
    }
}

impl Learner for RandomLearner {
    fn policy(&mut self) -> Result<Policy> {
        Ok(self.policy.clone())
    }
    fn observe(&mut self, _traj: &Trajectory) -> Result<()> {
        Ok(())
    }
}

/// Plays a fixed policy, e.g. the optimum or a fixed base-stock level.
pub struct FixedLearner {
    policy: Policy,
}

impl FixedLearner {
    pub fn new(policy: Policy) -> Self {
        Self { policy }
    }
}

impl Learner for FixedLearner {
    fn policy(&mut self) -> Result<Policy> {
        Ok(self.policy.clone())
    }
    fn observe(&mut self, _traj: &Trajectory) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgoConfig {
    UcrlVtr(#[serde(default)] UcrlVtrConfig),
    PlugIn {},
    QLearning(#[serde(default)] QLearningConfig),
    Random {},
    BaseStockSearch {},
    /// A fixed base-stock level (inventory only).
    BaseStock { level: usize },
    Optimal {},
}

impl AlgoConfig {
    pub fn label(&self) -> &'static str {
        match self {
            AlgoConfig::UcrlVtr(_) => "ucrl_vtr",
            AlgoConfig::PlugIn {} => "plug_in",
            AlgoConfig::QLearning(_) => "q_learning",
            AlgoConfig::Random {} => "random",
            AlgoConfig::BaseStockSearch {} => "base_stock_search",
            AlgoConfig::BaseStock { .. } => "base_stock",
            AlgoConfig::Optimal {} => "optimal",
        }
    }

    /// Rejects pairings that cannot run, before any episode is played.
    pub fn check(&self, env: &Environment, mode: ObservationMode) -> Result<()> {
        match self {
            AlgoConfig::PlugIn {} if mode == ObservationMode::None => {
                Err(Error::ObservationMode { learner: "plug_in" })
            }
            AlgoConfig::BaseStockSearch {} | AlgoConfig::BaseStock { .. } if env.inventory.is_none() => Err(
                Error::Config(format!("`{}` needs an inventory environment", self.label())),
            ),
            _ => Ok(()),
        }
    }
}

/// The spec with its exogenous law replaced by an uninformative one of the
/// same shape.
pub fn blind_structure(spec: &ExoMdpSpec) -> ExoMdpSpec {
    let d = spec.n_exo();
    let dist = match spec.exo_dist() {
        ExoDist::Homogeneous(_) => ExoDist::Homogeneous(ProbVec::uniform(d)),
        ExoDist::PerStage(ps) => ExoDist::PerStage(vec![ProbVec::uniform(d); ps.len()]),
    };
    spec.with_exo_dist(dist).expect("uniform law has the right shape")
}

/// Mean reward table under the true law, for known-reward planning.
fn true_mean_rewards(spec: &ExoMdpSpec) -> Vec<f64> {
    let p = spec.exo_dist().at(0);
    let mut out = Vec::with_capacity(spec.n_states() * spec.n_actions());
    for s in 0..spec.n_states() {
        for a in 0..spec.n_actions() {
            out.push(spec.mean_reward(s, a, p));
        }
    }
    out
}

pub fn make_learner(
    cfg: &AlgoConfig,
    env: &Environment,
    episodes: usize,
    mode: ObservationMode,
) -> Result<Box<dyn Learner>> {
    cfg.check(env, mode)?;
    let spec = &env.spec;
    let structure = blind_structure(spec);
    Ok(match cfg {
        AlgoConfig::UcrlVtr(c) => {
            let known = if c.known_rewards {
                if !spec.is_time_homogeneous() {
                    return Err(Error::Config("known rewards need a time-homogeneous law".into()));
                }
                Some(true_mean_rewards(spec))
            } else {
                None
            };
            Box::new(UcrlVtr::new(&structure, *c, known)?)
        }
        AlgoConfig::PlugIn {} => Box::new(PlugIn::new(&structure)),
        AlgoConfig::QLearning(c) => Box::new(QLearning::new(
            spec.horizon(),
            spec.n_states(),
            spec.n_actions(),
            episodes,
            *c,
        )?),
        AlgoConfig::Random {} => Box::new(RandomLearner::new(&structure)),
        AlgoConfig::BaseStockSearch {} => Box::new(BaseStockLearner::new(
            env.inventory.clone().expect("checked above"),
            episodes,
        )),
        AlgoConfig::BaseStock { level } => {
            let inv = env.inventory.as_ref().expect("checked above");
            Box::new(FixedLearner::new(inv.base_stock_policy(*level).into()))
        }
        AlgoConfig::Optimal {} => {
            let (pi, _) = crate::dp::dp_solve(spec, spec.exo_dist());
            Box::new(FixedLearner::new(pi.into()))
        }
    })
}
