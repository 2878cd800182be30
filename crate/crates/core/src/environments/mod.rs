//! Concrete Exo-MDPs.

mod hard;
mod infection;
mod inventory;
mod toy;

use serde::{Deserialize, Serialize};

pub use hard::{
    action_of, hypercube_law, make_exo_bandit, make_hard_nonstationary, make_hard_stationary, sign_vector,
    to_raw_total, HardInstanceParams,
};
pub use infection::{make_infection, INFECTION_SYMBOLS};
pub use inventory::{
    base_stock_action, make_inventory, make_inventory_capped, truncated_poisson, CostNormalization, Inventory,
    InventoryParams, InventoryState, Scenario, DEFAULT_STATE_CAP,
};
pub use toy::{
    ladder_gap, make_gap_ladder, LADDER_HORIZON, LADDER_LAW, LADDER_RUNGS, LADDER_SAFE_ACTION, LADDER_SYMBOLS,
};

use crate::error::{Error, Result};
use crate::model::ExoMdpSpec;

/// Serializable description of an environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvConfig {
    /// Either a named scenario or explicit parameters.
    Inventory {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scenario: Option<Scenario>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<InventoryParams>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cost_normalization: Option<CostNormalization>,
    },
    Infection {
        p0: f64,
        p1: f64,
        p2: f64,
        horizon: usize,
    },
    ExoBandit(HardInstanceParams),
    HardStationary(HardInstanceParams),
    HardNonstationary(HardInstanceParams),
    GapLadder {},
}

impl EnvConfig {
    pub fn scenario(s: Scenario) -> Self {
        EnvConfig::Inventory {
            scenario: Some(s),
            params: None,
            cost_normalization: None,
        }
    }

    /// Environment presets addressable by a short name.
    pub fn preset(name: &str) -> Result<Self> {
        let hard = |horizon: usize, z: Vec<Vec<i8>>| HardInstanceParams {
            d: 4,
            episodes: 100,
            z_tilde: z,
            horizon,
        };
        Ok(match name {
            "infection" => EnvConfig::Infection {
                p0: 0.3,
                p1: 0.1,
                p2: 0.4,
                horizon: 10,
            },
            "exo_bandit" => EnvConfig::ExoBandit(hard(1, vec![vec![1, -1]])),
            "hard_stationary" => EnvConfig::HardStationary(hard(5, vec![vec![1, -1]])),
            "hard_nonstationary" => EnvConfig::HardNonstationary(hard(4, vec![vec![1, -1], vec![-1, 1]])),
            "gap_ladder" => EnvConfig::GapLadder {},
            other => match other.parse::<Scenario>() {
                Ok(s) => EnvConfig::scenario(s),
                Err(_) => {
                    return Err(Error::Config(format!(
                        "unknown environment `{other}` (expected infection, exo_bandit, hard_stationary, \
                         hard_nonstationary, gap_ladder or scenario_1..3)"
                    )))
                }
            },
        })
    }

    pub fn build(&self) -> Result<Environment> {
        Ok(match self {
            EnvConfig::Inventory {
                scenario,
                params,
                cost_normalization,
            } => {
                let mut p = match (scenario, params) {
                    (Some(s), None) => s.params(),
                    (None, Some(p)) => p.clone(),
                    _ => {
                        return Err(Error::Config(
                            "inventory needs exactly one of `scenario` or `params`".into(),
                        ))
                    }
                };
                if let Some(n) = cost_normalization {
                    p.cost_normalization = *n;
                }
                let inv = make_inventory(p)?;
                Environment {
                    spec: inv.spec().clone(),
                    inventory: Some(inv),
                    raw_stages: None,
                }
            }
            EnvConfig::Infection { p0, p1, p2, horizon } => {
                Environment::plain(make_infection(*p0, *p1, *p2, *horizon)?)
            }
            EnvConfig::ExoBandit(p) => Environment::hypercube(make_exo_bandit(p)?),
            EnvConfig::HardStationary(p) => Environment::hypercube(make_hard_stationary(p)?),
            EnvConfig::HardNonstationary(p) => Environment::hypercube(make_hard_nonstationary(p)?),
            EnvConfig::GapLadder {} => Environment::plain(make_gap_ladder()?),
        })
    }
}

/// A built environment with the conversions needed for reporting.
#[derive(Debug, Clone)]
pub struct Environment {
    pub spec: ExoMdpSpec,
    /// Present for inventory instances.
    pub inventory: Option<Inventory>,
    /// Present for hypercube instances: stage count of the raw-reward map.
    raw_stages: Option<usize>,
}

impl Environment {
    fn plain(spec: ExoMdpSpec) -> Self {
        Environment {
            spec,
            inventory: None,
            raw_stages: None,
        }
    }

    fn hypercube(spec: ExoMdpSpec) -> Self {
        let stages = spec.horizon();
        Environment {
            spec,
            inventory: None,
            raw_stages: Some(stages),
        }
    }

    /// Whether reports are costs (lower is better) rather than values.
    pub fn is_cost(&self) -> bool {
        self.inventory.is_some()
    }

    /// The quantity reported for a policy with value `value`: total cost for
    /// inventory, raw return for hypercube instances, the value otherwise.
    pub fn report(&self, value: f64) -> f64 {
        match (&self.inventory, self.raw_stages) {
            (Some(inv), _) => inv.cost_from_value(value),
            (None, Some(stages)) => to_raw_total(value, stages),
            (None, None) => value,
        }
    }

    /// Regret in reported units, signed so that larger is worse.
    pub fn report_regret(&self, optimal: f64, value: f64) -> f64 {
        if self.is_cost() {
            self.report(value) - self.report(optimal)
        } else {
            self.report(optimal) - self.report(value)
        }
    }
}
