//! Tabular Q-learning with Hoeffding exploration bonuses.

use serde::{Deserialize, Serialize};

use super::Learner;
use crate::dp::argmax_first;
use crate::error::{Error, Result};
use crate::policy::{DeterministicPolicy, Policy};
use crate::rollout::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QLearningConfig {
    /// Bonus constant `c_b`.
    pub bonus: f64,
    pub delta: f64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        Self { bonus: 1.0, delta: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QLearningState {
    pub horizon: usize,
    pub n_states: usize,
    pub n_actions: usize,
    /// `q[(h * n_states + s) * n_actions + a]`, initialised to `H`.
    pub q: Vec<f64>,
    pub visits: Vec<u64>,
    /// `log(2 S A H K / delta)`.
    pub log_term: f64,
    pub bonus: f64,
}

impl QLearningState {
    pub fn new(horizon: usize, n_states: usize, n_actions: usize, episodes: usize, cfg: &QLearningConfig) -> Self {
        let cells = horizon * n_states * n_actions;
        let log_term = (2.0 * (n_states * n_actions * horizon * episodes) as f64 / cfg.delta).ln();
        Self {
            horizon,
            n_states,
            n_actions,
            q: vec![horizon as f64; cells],
            visits: vec![0; cells],
            log_term,
            bonus: cfg.bonus,
        }
    }

    #[inline]
    fn idx(&self, h: usize, s: usize, a: usize) -> usize {
        (h * self.n_states + s) * self.n_actions + a
    }

    fn row(&self, h: usize, s: usize) -> &[f64] {
        let b = self.idx(h, s, 0);
        &self.q[b..b + self.n_actions]
    }

    /// `min(H, max_a Q_h(s, a))`, zero past the last stage.
    pub fn value(&self, h: usize, s: usize) -> f64 {
        if h >= self.horizon {
            return 0.0;
        }
        self.row(h, s).iter().copied().fold(f64::NEG_INFINITY, f64::max).min(self.horizon as f64)
    }

    pub fn greedy(&self) -> DeterministicPolicy {
        DeterministicPolicy::from_fn(self.horizon, self.n_states, |h, s| argmax_first(self.row(h, s).iter().copied()).0)
    }

    /// One update at stage `h`.
    pub fn update(&mut self, h: usize, s: usize, a: usize, r: f64, s_next: usize) {
        let i = self.idx(h, s, a);
        self.visits[i] += 1;
        let t = self.visits[i] as f64;
        let hf = self.horizon as f64;
        let alpha = (hf + 1.0) / (hf + t);
        let b = self.bonus * (hf.powi(3) * self.log_term / t).sqrt();
        let target = r + self.value(h + 1, s_next) + b;
        self.q[i] = ((1.0 - alpha) * self.q[i] + alpha * target).min(hf);
    }
}

pub struct QLearning {
    state: QLearningState,
    policy: Option<DeterministicPolicy>,
}

impl QLearning {
    pub fn new(horizon: usize, n_states: usize, n_actions: usize, episodes: usize, cfg: QLearningConfig) -> Result<Self> {
        if !(cfg.delta > 0.0 && cfg.delta < 1.0) || !(cfg.bonus >= 0.0) {
            return Err(Error::InvalidParameter("need 0 < delta < 1 and bonus >= 0".into()));
        }
        Ok(Self {
            state: QLearningState::new(horizon, n_states, n_actions, episodes.max(1), &cfg),
            policy: None,
        })
    }

    pub fn state(&self) -> &QLearningState {
        &self.state
    }
}

impl Learner for QLearning {
    fn policy(&mut self) -> Result<Policy> {
        let pi = self.policy.get_or_insert_with(|| self.state.greedy());
        Ok(pi.clone().into())
    }

    /// Updates run from the last stage back to the first, so each target
    /// already uses this episode's update of the next stage.
    fn observe(&mut self, traj: &Trajectory) -> Result<()> {
        for t in traj.transitions().iter().rev() {
            self.state.update(t.stage, t.state, t.action, t.reward, t.next_state);
        }
        self.policy = None;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExoMdpSpec, ProbVec, SpecTables};
    use crate::rng::{stream, Purpose};
    use crate::rollout::{rollout_episode, ObservationMode};

    #[test]
    fn first_visit_replaces_value() {
        let cfg = QLearningConfig::default();
        let mut st = QLearningState::new(3, 2, 2, 10, &cfg);
        st.update(2, 0, 1, 0.4, 1);
        let b1 = (27.0 * st.log_term).sqrt();
        assert!((st.q[st.idx(2, 0, 1)] - (0.4 + b1).min(3.0)).abs() < 1e-12);
        let mut st0 = QLearningState::new(3, 2, 2, 10, &QLearningConfig { bonus: 0.0, delta: 0.05 });
        st0.update(2, 0, 1, 0.4, 1);
        assert_eq!(st0.q[st0.idx(2, 0, 1)], 0.4);
    }

    #[test]
    fn deterministic_chain_converges_to_returns() {
        // One action, state h at stage h, reward 0.1 (h + 1).
        let horizon = 4;
        let spec = ExoMdpSpec::from_tables(SpecTables {
            n_states: horizon + 1,
            n_actions: 1,
            n_exo: 1,
            horizon,
            start_state: 0,
            transitions: (0..=horizon).map(|s| (s + 1).min(horizon)).collect(),
            rewards: (0..=horizon).map(|s| 0.1 * (s + 1) as f64).collect(),
            exo_dist: ProbVec::uniform(1).into(),
            observations: None,
        })
        .unwrap();
        let mut learner = QLearning::new(horizon, horizon + 1, 1, 10, QLearningConfig { bonus: 0.0, delta: 0.05 }).unwrap();
        for e in 0..horizon as u64 {
            let pi = learner.policy().unwrap();
            let traj = rollout_episode(&spec, &pi, &mut stream(0, Purpose::Environment, e), ObservationMode::None);
            learner.observe(&traj).unwrap();
        }
        for h in 0..horizon {
            let expect: f64 = (h..horizon).map(|s| 0.1 * (s + 1) as f64).sum();
            assert!((learner.state().value(h, h) - expect).abs() < 1e-12);
        }
    }
}
