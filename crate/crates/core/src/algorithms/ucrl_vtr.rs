//! UCRL-VTR: optimistic planning on variance-weighted ridge estimates of the
//! exogenous law, one regression per stage.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::Learner;
use crate::dp::{argmax_first, ValueTable};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linear_mixture::{build_features, build_info_matrix, rank_reduce, FeatureSet, RankReduction};
use crate::model::ExoMdpSpec;
use crate::policy::{DeterministicPolicy, Policy};
use crate::rollout::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UcrlVtrConfig {
    pub delta: f64,
    /// Bound `B` on the parameter norm; the ridge weight is `1 / B^2`.
    pub norm_bound: f64,
    /// Multiplier applied to all three confidence radii.
    pub bonus_scale: f64,
    pub rank_reduction: bool,
    /// Plan with the true mean rewards instead of estimating them.
    pub known_rewards: bool,
    pub exec: Exec,
}

impl Default for UcrlVtrConfig {
    fn default() -> Self {
        Self {
            delta: 0.05,
            norm_bound: 1.0,
            bonus_scale: 1.0,
            rank_reduction: true,
            known_rewards: false,
            exec: Exec::Sequential,
        }
    }
}

/// Confidence radii of episode `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bonuses {
    pub hat: f64,
    pub breve: f64,
    pub tilde: f64,
}

pub fn beta_bonuses(k: usize, dim: usize, lambda: f64, delta: f64, norm_bound: f64, horizon: usize) -> Bonuses {
    let (k, d, h) = (k as f64, dim as f64, horizon as f64);
    let log_conf = (4.0 * k * k * h / delta).ln();
    let ridge = lambda.sqrt() * norm_bound;
    let h4 = h.powi(4);
    Bonuses {
        hat: 8.0 * (d * (1.0 + k / lambda).ln() * log_conf).sqrt() + 4.0 * d.sqrt() * log_conf + ridge,
        breve: 8.0 * d * ((1.0 + k / lambda).ln() * log_conf).sqrt() + 4.0 * d.sqrt() * log_conf + ridge,
        tilde: 8.0 * (d * h4 * (1.0 + k * h4 / (d * lambda)).ln() * log_conf).sqrt() + 4.0 * h * h * log_conf + ridge,
    }
}

/// Ridge statistics of one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageStats {
    pub sigma_hat: DMatrix<f64>,
    pub b_hat: DVector<f64>,
    pub theta_hat: DVector<f64>,
    pub sigma_tilde: DMatrix<f64>,
    pub b_tilde: DVector<f64>,
    pub theta_tilde: DVector<f64>,
}

impl StageStats {
    fn new(dim: usize, lambda: f64) -> Self {
        Self {
            sigma_hat: DMatrix::identity(dim, dim) * lambda,
            b_hat: DVector::zeros(dim),
            theta_hat: DVector::zeros(dim),
            sigma_tilde: DMatrix::identity(dim, dim) * lambda,
            b_tilde: DVector::zeros(dim),
            theta_tilde: DVector::zeros(dim),
        }
    }

    fn refresh(&mut self) -> Result<()> {
        self.theta_hat = solve(&self.sigma_hat, &self.b_hat)?;
        self.theta_tilde = solve(&self.sigma_tilde, &self.b_tilde)?;
        Ok(())
    }
}

fn solve(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    m.clone()
        .cholesky()
        .map(|c| c.solve(b))
        .ok_or_else(|| Error::Contract("ridge Gram matrix is not positive definite".into()))
}

fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Contract("ridge Gram matrix is not positive definite".into()))
}

/// Full learner state.
#[derive(Debug, Clone, PartialEq)]
pub struct UcrlVtrState {
    pub stages: Vec<StageStats>,
    pub lambda: f64,
    pub norm_bound: f64,
    pub delta: f64,
    /// Index of the current episode, starting at 1.
    pub k: usize,
}

impl UcrlVtrState {
    pub fn new(horizon: usize, dim: usize, cfg: &UcrlVtrConfig) -> Self {
        let lambda = 1.0 / (cfg.norm_bound * cfg.norm_bound);
        Self {
            stages: (0..horizon).map(|_| StageStats::new(dim, lambda)).collect(),
            lambda,
            norm_bound: cfg.norm_bound,
            delta: cfg.delta,
            k: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.stages[0].b_hat.len()
    }
}

/// Feature maps the learner plans with: the raw features of the known
/// dynamics, optionally projected onto a lower-dimensional basis.
#[derive(Debug, Clone)]
pub struct LearnerFeatures {
    features: FeatureSet,
    basis: Option<RankReduction>,
    /// Reduced `phi_r(s, a)`, row-major over `(s, a)`.
    reward: Vec<f64>,
}

impl LearnerFeatures {
    pub fn new(spec: &ExoMdpSpec, rank_reduction: bool, cover_rewards: bool) -> Self {
        let features = build_features(spec);
        let basis = rank_reduction.then(|| {
            let red = rank_reduce(&build_info_matrix(&features));
            if cover_rewards {
                red.covering_rewards(&features)
            } else {
                red
            }
        });
        let mut lf = Self {
            features,
            basis,
            reward: Vec::new(),
        };
        let dim = lf.dim();
        let mut reward = vec![0.0; spec.n_states() * spec.n_actions() * dim];
        for s in 0..spec.n_states() {
            for a in 0..spec.n_actions() {
                let off = (s * spec.n_actions() + a) * dim;
                let raw = lf.features.phi_r(s, a).to_vec();
                lf.reduce(&raw, &mut reward[off..off + dim]);
            }
        }
        lf.reward = reward;
        lf
    }

    pub fn dim(&self) -> usize {
        self.basis.as_ref().map_or(self.features.dim(), RankReduction::dim)
    }

    pub fn raw(&self) -> &FeatureSet {
        &self.features
    }

    fn reduce(&self, raw: &[f64], out: &mut [f64]) {
        match &self.basis {
            Some(b) => b.project(raw, out),
            None => out.copy_from_slice(raw),
        }
    }

    fn phi_r(&self, s: usize, a: usize) -> &[f64] {
        let dim = self.dim();
        let off = (s * self.features.n_actions() + a) * dim;
        &self.reward[off..off + dim]
    }

    /// Reduced `phi_V(s, a)` for value vector `v`, using `raw` as scratch.
    fn phi_v(&self, s: usize, a: usize, v: &[f64], raw: &mut [f64], out: &mut [f64]) {
        self.features.phi_v(s, a, v, raw);
        self.reduce(raw, out);
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `sqrt(x^T m x)` for symmetric `m` stored column-major.
fn quad_norm(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    let data = m.as_slice();
    let mut acc = 0.0;
    for (j, xj) in x.iter().enumerate() {
        acc += xj * dot(&data[j * n..(j + 1) * n], x);
    }
    acc.max(0.0).sqrt()
}

/// Result of one backward planning pass.
#[derive(Debug, Clone)]
pub struct Plan {
    pub policy: DeterministicPolicy,
    pub values: ValueTable,
    /// Inverse Gram matrices used by the pass, per stage.
    inverses: Vec<DMatrix<f64>>,
    bonuses: Bonuses,
}

/// Optimistic backward induction. `known_rewards` supplies the true mean
/// reward of every `(s, a)`; without it rewards are estimated optimistically
/// through the same parameter.
pub fn ucrl_plan(
    state: &UcrlVtrState,
    feats: &LearnerFeatures,
    known_rewards: Option<&[f64]>,
    bonus_scale: f64,
    exec: Exec,
) -> Result<Plan> {
    let horizon = state.stages.len();
    let (n_states, n_actions) = (feats.raw().n_states(), feats.raw().n_actions());
    let dim = state.dim();
    let b = beta_bonuses(state.k, dim, state.lambda, state.delta, state.norm_bound, horizon);
    let bonuses = Bonuses {
        hat: b.hat * bonus_scale,
        breve: b.breve * bonus_scale,
        tilde: b.tilde * bonus_scale,
    };
    let mut values = ValueTable::zeros(horizon, n_states);
    let mut policy = DeterministicPolicy::constant(horizon, n_states, 0);
    let mut inverses = Vec::with_capacity(horizon);
    let mut best = vec![(0usize, 0.0f64); n_states];
    let cap = horizon as f64;
    for h in (0..horizon).rev() {
        let st = &state.stages[h];
        let inv = inverse(&st.sigma_hat)?;
        let theta = st.theta_hat.as_slice();
        let next = values.stage(h + 1).to_vec();
        exec.fill(&mut best, |s| {
            let mut raw = vec![0.0; feats.raw().dim()];
            let mut phi = vec![0.0; dim];
            argmax_first((0..n_actions).map(|a| {
                let r = match known_rewards {
                    Some(r) => r[s * n_actions + a],
                    None => {
                        let pr = feats.phi_r(s, a);
                        (dot(theta, pr) + bonuses.hat * quad_norm(&inv, pr)).clamp(0.0, 1.0)
                    }
                };
                feats.phi_v(s, a, &next, &mut raw, &mut phi);
                let q = r + dot(theta, &phi) + bonuses.hat * quad_norm(&inv, &phi);
                q.min(cap).max(0.0)
            }))
        });
        let row = values.stage_mut(h);
        for (s, &(a, v)) in best.iter().enumerate() {
            row[s] = v;
            policy.set(h, s, a);
        }
        inverses.push(inv);
    }
    inverses.reverse();
    Ok(Plan {
        policy,
        values,
        inverses,
        bonuses,
    })
}

/// One weighted observation, as folded into the stage statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Update {
    pub phi_v: Vec<f64>,
    pub phi_v2: Vec<f64>,
    pub target: f64,
    pub sigma_sq: f64,
    /// Reward feature and observed reward, when rewards are estimated.
    pub reward: Option<(Vec<f64>, f64)>,
}

/// Folds the transition `(s, a, s_next)` with reward `r_obs` at stage `h` into
/// `state`, given the plan that produced the episode. Estimates are not
/// refreshed; call [`refresh_estimates`] once the episode is complete.
#[allow(clippy::too_many_arguments)]
pub fn ucrl_observe(
    state: &mut UcrlVtrState,
    plan: &Plan,
    feats: &LearnerFeatures,
    h: usize,
    s: usize,
    a: usize,
    s_next: usize,
    r_obs: Option<f64>,
) -> Update {
    let horizon = state.stages.len() as f64;
    let dim = state.dim();
    let v_next = plan.values.stage(h + 1);
    let v_sq: Vec<f64> = v_next.iter().map(|v| v * v).collect();
    let mut raw = vec![0.0; feats.raw().dim()];
    let mut phi = vec![0.0; dim];
    let mut phi2 = vec![0.0; dim];
    feats.phi_v(s, a, v_next, &mut raw, &mut phi);
    feats.phi_v(s, a, &v_sq, &mut raw, &mut phi2);

    let st = &mut state.stages[h];
    let inv = &plan.inverses[h];
    let second = dot(&phi2, st.theta_tilde.as_slice()).clamp(0.0, horizon * horizon);
    let first = dot(&phi, st.theta_hat.as_slice()).clamp(0.0, horizon);
    let var = second - first * first;
    let e = (2.0 * horizon * plan.bonuses.breve * quad_norm(inv, &phi)).min(horizon * horizon)
        + (plan.bonuses.tilde * quad_norm(inv, &phi2)).min(horizon * horizon);
    let sigma_sq = (horizon * horizon / dim as f64).max(var + e);

    let target = v_next[s_next];
    let pv = DVector::from_column_slice(&phi);
    let pv2 = DVector::from_column_slice(&phi2);
    st.sigma_hat.ger(1.0 / sigma_sq, &pv, &pv, 1.0);
    st.b_hat.axpy(target / sigma_sq, &pv, 1.0);
    st.sigma_tilde.ger(1.0, &pv2, &pv2, 1.0);
    st.b_tilde.axpy(target * target, &pv2, 1.0);

    let reward = r_obs.map(|r| {
        let pr = feats.phi_r(s, a).to_vec();
        let v = DVector::from_column_slice(&pr);
        st.sigma_hat.ger(1.0, &v, &v, 1.0);
        st.b_hat.axpy(r, &v, 1.0);
        (pr, r)
    });
    Update {
        phi_v: phi,
        phi_v2: phi2,
        target,
        sigma_sq,
        reward,
    }
}

/// Recomputes all parameter estimates and advances the episode counter.
pub fn refresh_estimates(state: &mut UcrlVtrState) -> Result<()> {
    for st in &mut state.stages {
        st.refresh()?;
    }
    state.k += 1;
    Ok(())
}

/// UCRL-VTR as an episodic learner.
pub struct UcrlVtr {
    cfg: UcrlVtrConfig,
    feats: LearnerFeatures,
    known_rewards: Option<Vec<f64>>,
    state: UcrlVtrState,
    plan: Option<Plan>,
}

impl UcrlVtr {
    /// `structure` supplies the dynamics `f` and `g`; its exogenous law is
    /// never read. `known_rewards` is required iff `cfg.known_rewards`.
    pub fn new(structure: &ExoMdpSpec, cfg: UcrlVtrConfig, known_rewards: Option<Vec<f64>>) -> Result<Self> {
        if cfg.known_rewards != known_rewards.is_some() {
            return Err(Error::Config("known-reward mode needs the mean reward table".into()));
        }
        if !(cfg.delta > 0.0 && cfg.delta < 1.0) || !(cfg.norm_bound > 0.0) || !(cfg.bonus_scale >= 0.0) {
            return Err(Error::InvalidParameter(
                "need 0 < delta < 1, norm_bound > 0 and bonus_scale >= 0".into(),
            ));
        }
        let feats = LearnerFeatures::new(structure, cfg.rank_reduction, !cfg.known_rewards);
        let state = UcrlVtrState::new(structure.horizon(), feats.dim(), &cfg);
        Ok(Self {
            cfg,
            feats,
            known_rewards,
            state,
            plan: None,
        })
    }

    pub fn state(&self) -> &UcrlVtrState {
        &self.state
    }

    pub fn dim(&self) -> usize {
        self.feats.dim()
    }

    fn ensure_plan(&mut self) -> Result<&Plan> {
        if self.plan.is_none() {
            self.plan = Some(ucrl_plan(
                &self.state,
                &self.feats,
                self.known_rewards.as_deref(),
                self.cfg.bonus_scale,
                self.cfg.exec,
            )?);
        }
        Ok(self.plan.as_ref().expect("plan just set"))
    }
}

impl Learner for UcrlVtr {
    fn policy(&mut self) -> Result<Policy> {
        Ok(self.ensure_plan()?.policy.clone().into())
    }

    fn observe(&mut self, traj: &Trajectory) -> Result<()> {
        self.ensure_plan()?;
        let plan = self.plan.take().expect("plan exists");
        let estimate_rewards = self.known_rewards.is_none();
        for t in traj.transitions() {
            let r = estimate_rewards.then_some(t.reward);
            ucrl_observe(&mut self.state, &plan, &self.feats, t.stage, t.state, t.action, t.next_state, r);
        }
        refresh_estimates(&mut self.state)
    }
}
