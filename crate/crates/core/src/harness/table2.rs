//! Inventory comparison across scenarios: optimal and best base-stock costs
//! plus the final cost of each learner.

use serde::Serialize;

use super::{aggregate, run_experiment, ExperimentConfig};
use crate::algorithms::{AlgoConfig, UcrlVtrConfig};
use crate::dp::policy_value;
use crate::environments::{EnvConfig, Inventory, Scenario};
use crate::error::Result;
use crate::exec::Exec;

/// Exact cost of every base-stock level `0..=max_base_stock`.
pub fn base_stock_costs(inv: &Inventory) -> Result<Vec<f64>> {
    let spec = inv.spec();
    (0..=inv.max_base_stock())
        .map(|b| Ok(inv.cost_from_value(policy_value(spec, spec.exo_dist(), &inv.base_stock_policy(b).into())?)))
        .collect()
}

/// `(level, cost)` of the cheapest base-stock level; ties go to the lowest.
pub fn best_base_stock(inv: &Inventory) -> Result<(usize, f64)> {
    let costs = base_stock_costs(inv)?;
    Ok(costs
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (b, c)| if c < best.1 { (b, c) } else { best }))
}

/// Learners compared per scenario.
pub fn default_algorithms() -> Vec<AlgoConfig> {
    vec![
        AlgoConfig::Random {},
        AlgoConfig::QLearning(Default::default()),
        AlgoConfig::UcrlVtr(UcrlVtrConfig::default()),
        AlgoConfig::PlugIn {},
        AlgoConfig::BaseStockSearch {},
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnerRow {
    pub algorithm: String,
    pub final_mean: f64,
    pub final_stderr: f64,
    pub final_costs: Vec<f64>,
    pub mean_final_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRow {
    pub scenario: Scenario,
    pub optimal_cost: f64,
    pub best_base_stock: usize,
    pub best_base_stock_cost: f64,
    pub learners: Vec<LearnerRow>,
}

impl ScenarioRow {
    pub fn learner(&self, name: &str) -> Option<&LearnerRow> {
        self.learners.iter().find(|r| r.algorithm == name)
    }
}

pub fn table2_row(
    scenario: Scenario,
    algorithms: &[AlgoConfig],
    episodes: usize,
    seeds: &[u64],
    exec: Exec,
) -> Result<ScenarioRow> {
    let env_cfg = EnvConfig::scenario(scenario);
    let env = env_cfg.build()?;
    let inv = env.inventory.as_ref().expect("scenario builds an inventory");
    let opt = super::optimum(&env);
    let (best_b, best_cost) = best_base_stock(inv)?;
    let mut learners = Vec::with_capacity(algorithms.len());
    for algo in algorithms {
        let mut cfg = ExperimentConfig::new(env_cfg.clone(), algo.clone(), episodes, seeds.to_vec());
        cfg.exec = exec;
        let runs = run_experiment(&cfg)?;
        let s = aggregate(&runs)?;
        learners.push(LearnerRow {
            algorithm: algo.label().to_string(),
            final_mean: s.final_mean,
            final_stderr: s.final_stderr,
            final_costs: s.final_values,
            mean_final_regret: *s.mean_cum_regret.last().unwrap_or(&0.0),
        });
    }
    Ok(ScenarioRow {
        scenario,
        optimal_cost: opt.reported,
        best_base_stock: best_b,
        best_base_stock_cost: best_cost,
        learners,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::make_inventory;

    #[test]
    fn best_level_is_argmin() {
        let inv = make_inventory(Scenario::II.params()).unwrap();
        let costs = base_stock_costs(&inv).unwrap();
        let (b, c) = best_base_stock(&inv).unwrap();
        assert_eq!(costs.len(), inv.max_base_stock() + 1);
        assert!(costs.iter().all(|&x| x >= c));
        assert_eq!(costs[b], c);
    }

    #[test]
    fn short_row_has_every_learner() {
        let algos = [AlgoConfig::Random {}, AlgoConfig::Optimal {}];
        let row = table2_row(Scenario::II, &algos, 2, &[0, 1], Exec::Sequential).unwrap();
        assert_eq!(row.learners.len(), 2);
        let opt = row.learner("optimal").unwrap();
        assert!((opt.final_mean - row.optimal_cost).abs() < 1e-9);
        assert!(row.learner("random").unwrap().final_mean > row.optimal_cost);
    }
}
