//! Single-product inventory control with lost sales and an order lead time.
//!
//! The endogenous state is the on-hand inventory together with the orders
//! still in the pipeline, `(I, O_{h-L}, .., O_{h-1})`; demand is the
//! exogenous input. Inventory above the demand support is discarded, which
//! keeps the state space at `(d + 1)^(L + 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ExoMdpSpec, ProbVec, SpecTables};
use crate::policy::DeterministicPolicy;

/// Default cap on the number of endogenous states.
pub const DEFAULT_STATE_CAP: usize = 200_000;

/// How reported costs relate to the `[0, 1]` rewards of the spec.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostNormalization {
    /// Costs in the units of `h` and `p`.
    #[default]
    Raw,
    /// Costs divided by the largest single-stage cost, so each stage is in `[0, 1]`.
    MaxStage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InventoryParams {
    pub horizon: usize,
    pub lead_time: usize,
    pub holding_cost: f64,
    pub lost_sales_penalty: f64,
    /// Demand takes values in `0..=demand_support`.
    pub demand_support: usize,
    pub demand_dist: ProbVec,
    #[serde(default)]
    pub cost_normalization: CostNormalization,
}

/// The three configurations of the case study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "scenario_1", alias = "I")]
    I,
    #[serde(rename = "scenario_2", alias = "II")]
    II,
    #[serde(rename = "scenario_3", alias = "III")]
    III,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::I, Scenario::II, Scenario::III];

    /// `(H, L, h, p, d, lambda)`.
    pub fn table(self) -> (usize, usize, f64, f64, usize, f64) {
        match self {
            Scenario::I => (25, 2, 6.0, 1.0, 8, 3.0),
            Scenario::II => (20, 0, 6.0, 4.0, 10, 7.0),
            Scenario::III => (20, 0, 8.0, 3.0, 25, 7.0),
        }
    }

    pub fn params(self) -> InventoryParams {
        let (horizon, lead_time, holding_cost, lost_sales_penalty, d, lambda) = self.table();
        InventoryParams {
            horizon,
            lead_time,
            holding_cost,
            lost_sales_penalty,
            demand_support: d,
            demand_dist: truncated_poisson(lambda, d),
            cost_normalization: CostNormalization::Raw,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::I => "I",
            Scenario::II => "II",
            Scenario::III => "III",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" | "scenario_1" => Ok(Scenario::I),
            "II" | "2" | "scenario_2" => Ok(Scenario::II),
            "III" | "3" | "scenario_3" => Ok(Scenario::III),
            _ => Err(Error::Config(format!("unknown inventory scenario `{s}`"))),
        }
    }
}

/// Poisson(`lambda`) on `0..=d` with the tail `P(X >= d)` folded into `d`.
pub fn truncated_poisson(lambda: f64, d: usize) -> ProbVec {
    let mut probs = Vec::with_capacity(d + 1);
    let mut pmf = (-lambda).exp();
    let mut below = 0.0;
    for j in 0..d {
        probs.push(pmf);
        below += pmf;
        pmf *= lambda / (j + 1) as f64;
    }
    probs.push((1.0 - below).max(0.0));
    ProbVec::from_weights(&probs).expect("poisson weights are positive")
}

/// An inventory instance: the spec plus what is needed to read states and
/// convert values back to costs.
#[derive(Debug, Clone)]
pub struct Inventory {
    params: InventoryParams,
    spec: ExoMdpSpec,
    max_stage_cost: f64,
}

/// Decoded inventory state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InventoryState {
    pub on_hand: usize,
    /// Outstanding orders, oldest first (`O_{h-L}` .. `O_{h-1}`).
    pub pipeline: Vec<usize>,
}

pub fn make_inventory(params: InventoryParams) -> Result<Inventory> {
    make_inventory_capped(params, DEFAULT_STATE_CAP)
}

pub fn make_inventory_capped(params: InventoryParams, cap: usize) -> Result<Inventory> {
    let d = params.demand_support;
    let lead = params.lead_time;
    if params.horizon == 0 || d == 0 {
        return Err(Error::InvalidParameter("horizon and demand support must be positive".into()));
    }
    if !(params.holding_cost >= 0.0 && params.lost_sales_penalty >= 0.0) {
        return Err(Error::InvalidParameter("costs must be non-negative".into()));
    }
    if params.demand_dist.len() != d + 1 {
        return Err(Error::InvalidParameter(format!(
            "demand distribution has {} entries, expected {}",
            params.demand_dist.len(),
            d + 1
        )));
    }
    let n_states = (d as u128 + 1)
        .checked_pow(lead as u32 + 1)
        .filter(|&n| n <= cap as u128)
        .ok_or(Error::Capacity {
            what: "inventory state space",
            required: (d as u128 + 1).saturating_pow(lead as u32 + 1),
            cap: cap as u128,
        })? as usize;
    let n_actions = d + 1;
    let n_exo = d + 1;

    let codec = Codec { d, lead };
    let cells = n_states * n_actions * n_exo;
    let mut transitions = Vec::with_capacity(cells);
    let mut costs = Vec::with_capacity(cells);
    let mut sales = Vec::with_capacity(cells);
    let mut state = InventoryState {
        on_hand: 0,
        pipeline: vec![0; lead],
    };
    for s in 0..n_states {
        codec.decode_into(s, &mut state);
        for a in 0..n_actions {
            let avail = state.on_hand + if lead == 0 { a } else { state.pipeline[0] };
            for demand in 0..n_exo {
                let left = avail.saturating_sub(demand);
                let lost = demand.saturating_sub(avail);
                costs.push(params.holding_cost * left as f64 + params.lost_sales_penalty * lost as f64);
                sales.push(avail.min(demand));
                let next_on_hand = left.min(d);
                transitions.push(codec.encode_shifted(next_on_hand, &state.pipeline, a));
            }
        }
    }
    let max_stage_cost = costs.iter().copied().fold(0.0, f64::max);
    let scale = if max_stage_cost > 0.0 { max_stage_cost } else { 1.0 };
    let rewards = costs.iter().map(|c| 1.0 - c / scale).collect();
    let spec = ExoMdpSpec::from_tables(SpecTables {
        n_states,
        n_actions,
        n_exo,
        horizon: params.horizon,
        start_state: 0,
        transitions,
        rewards,
        exo_dist: params.demand_dist.clone().into(),
        observations: Some(sales),
    })?;
    Ok(Inventory {
        params,
        spec,
        max_stage_cost: scale,
    })
}

#[derive(Debug, Clone, Copy)]
struct Codec {
    d: usize,
    lead: usize,
}

impl Codec {
    // Mixed radix d + 1, on-hand inventory most significant.
    fn decode_into(&self, mut s: usize, out: &mut InventoryState) {
        let base = self.d + 1;
        for slot in out.pipeline.iter_mut().rev() {
            *slot = s % base;
            s /= base;
        }
        out.on_hand = s;
    }

    fn encode(&self, on_hand: usize, pipeline: &[usize]) -> usize {
        let base = self.d + 1;
        pipeline.iter().fold(on_hand, |acc, &o| acc * base + o)
    }

    /// Next state after the oldest order arrives and `order` joins the pipeline.
    fn encode_shifted(&self, on_hand: usize, pipeline: &[usize], order: usize) -> usize {
        if self.lead == 0 {
            return on_hand;
        }
        let base = self.d + 1;
        let acc = pipeline[1..].iter().fold(on_hand, |acc, &o| acc * base + o);
        acc * base + order
    }
}

impl Inventory {
    pub fn spec(&self) -> &ExoMdpSpec {
        &self.spec
    }

    pub fn params(&self) -> &InventoryParams {
        &self.params
    }

    pub fn max_stage_cost(&self) -> f64 {
        self.max_stage_cost
    }

    pub fn decode(&self, s: usize) -> InventoryState {
        let mut out = InventoryState {
            on_hand: 0,
            pipeline: vec![0; self.params.lead_time],
        };
        self.codec().decode_into(s, &mut out);
        out
    }

    pub fn encode(&self, state: &InventoryState) -> usize {
        self.codec().encode(state.on_hand, &state.pipeline)
    }

    fn codec(&self) -> Codec {
        Codec {
            d: self.params.demand_support,
            lead: self.params.lead_time,
        }
    }

    /// Multiplier from normalised per-stage cost to reported cost.
    pub fn cost_scale(&self) -> f64 {
        match self.params.cost_normalization {
            CostNormalization::Raw => self.max_stage_cost,
            CostNormalization::MaxStage => 1.0,
        }
    }

    /// Expected total cost of a policy whose value (sum of rewards) is `value`.
    pub fn cost_from_value(&self, value: f64) -> f64 {
        self.cost_scale() * (self.params.horizon as f64 - value)
    }

    /// Single-stage cost of ordering `a` in state `s` when demand is `demand`.
    pub fn stage_cost(&self, s: usize, a: usize, demand: usize) -> f64 {
        self.cost_scale() * (1.0 - self.spec.reward(s, a, demand))
    }

    /// Order-up-to action for level `b` in state `s`.
    pub fn base_stock_action(&self, b: usize, s: usize) -> usize {
        let st = self.decode(s);
        base_stock_action(b, st.on_hand, &st.pipeline, self.params.demand_support)
    }

    /// Stationary base-stock policy with level `b`.
    pub fn base_stock_policy(&self, b: usize) -> DeterministicPolicy {
        let per_state: Vec<usize> = (0..self.spec.n_states()).map(|s| self.base_stock_action(b, s)).collect();
        DeterministicPolicy::from_fn(self.params.horizon, self.spec.n_states(), |_, s| per_state[s])
    }

    /// Largest base-stock level worth considering, `(L + 1) d`.
    pub fn max_base_stock(&self) -> usize {
        (self.params.lead_time + 1) * self.params.demand_support
    }
}

/// `(b - I - sum(pipeline))^+`, capped at `max_order`.
pub fn base_stock_action(b: usize, on_hand: usize, pipeline: &[usize], max_order: usize) -> usize {
    let position = on_hand + pipeline.iter().sum::<usize>();
    b.saturating_sub(position).min(max_order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{dp_solve, policy_value};
    use crate::rng::{stream, Purpose};
    use crate::rollout::{rollout_episode, ObservationMode};

    fn small(lead: usize) -> Inventory {
        make_inventory(InventoryParams {
            horizon: 4,
            lead_time: lead,
            holding_cost: 2.0,
            lost_sales_penalty: 3.0,
            demand_support: 5,
            demand_dist: truncated_poisson(2.0, 5),
            cost_normalization: CostNormalization::Raw,
        })
        .unwrap()
    }

    #[test]
    fn poisson_truncation() {
        let p = truncated_poisson(3.0, 8);
        assert!((p[0] - (-3.0f64).exp()).abs() < 1e-15);
        let mut below = 0.0;
        let mut fact = 1.0;
        for j in 0..8 {
            if j > 0 {
                fact *= j as f64;
            }
            below += (-3.0f64).exp() * 3f64.powi(j) / fact;
        }
        assert!((p[8] - (1.0 - below)).abs() < 1e-12);
        assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let tiny = truncated_poisson(1e-300, 4);
        assert_eq!(tiny[0], 1.0);
    }

    #[test]
    fn zero_lead_step_arithmetic() {
        let inv = small(0);
        let s = inv.encode(&InventoryState {
            on_hand: 3,
            pipeline: vec![],
        });
        let (next, _) = inv.spec().step(s, 0, 5).unwrap();
        assert_eq!(inv.decode(next).on_hand, 0);
        assert!((inv.stage_cost(s, 0, 5) - 3.0 * 2.0).abs() < 1e-9);
        let s2 = inv.encode(&InventoryState {
            on_hand: 2,
            pipeline: vec![],
        });
        let (next, _) = inv.spec().step(s2, 1, 1).unwrap();
        assert_eq!(inv.decode(next).on_hand, 2);
        assert!((inv.stage_cost(s2, 1, 1) - 2.0 * 2.0).abs() < 1e-9);
        assert_eq!(inv.spec().observation(s2, 1, 4), Some(3));
    }

    #[test]
    fn pipeline_shifts() {
        let inv = small(2);
        assert_eq!(inv.spec().n_states(), 216);
        let s = inv.encode(&InventoryState {
            on_hand: 1,
            pipeline: vec![2, 4],
        });
        assert_eq!(inv.decode(s).pipeline, vec![2, 4]);
        let (next, _) = inv.spec().step(s, 3, 1).unwrap();
        assert_eq!(
            inv.decode(next),
            InventoryState {
                on_hand: 2,
                pipeline: vec![4, 3]
            }
        );
    }

    #[test]
    fn inventory_balance_along_trajectories() {
        let inv = small(1);
        // Levels up to d never push on-hand stock past the cap.
        let pi = inv.base_stock_policy(5).into();
        for e in 0..20 {
            let mut rng = stream(9, Purpose::Environment, e);
            let traj = rollout_episode(inv.spec(), &pi, &mut rng, ObservationMode::None);
            for t in traj.transitions() {
                let cur = inv.decode(t.state);
                let nxt = inv.decode(t.next_state);
                let sold = t.observation.unwrap();
                assert_eq!(nxt.on_hand + sold, cur.on_hand + cur.pipeline[0]);
            }
        }
    }

    #[test]
    fn base_stock_examples() {
        assert_eq!(base_stock_action(7, 0, &[], 5), 5);
        assert_eq!(base_stock_action(3, 0, &[], 5), 3);
        assert_eq!(base_stock_action(4, 3, &[2], 5), 0);
        assert_eq!(base_stock_action(5, 2, &[1], 5), 2);
    }

    #[test]
    fn optimal_cost_beats_base_stock_and_zero_orders() {
        let inv = small(1);
        let (_, v) = dp_solve(inv.spec(), inv.spec().exo_dist());
        let opt = inv.cost_from_value(v.get(0, 0));
        for b in 0..=inv.max_base_stock() {
            let val = policy_value(inv.spec(), inv.spec().exo_dist(), &inv.base_stock_policy(b).into()).unwrap();
            assert!(inv.cost_from_value(val) >= opt - 1e-9);
        }
        let zero = DeterministicPolicy::constant(4, inv.spec().n_states(), 0);
        let zc = inv.cost_from_value(policy_value(inv.spec(), inv.spec().exo_dist(), &zero.into()).unwrap());
        assert!(zc > opt);
    }
}
