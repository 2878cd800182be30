//! Simulating episodes.

use serde::{Deserialize, Serialize};

use crate::model::{sample_exogenous, ExoMdpSpec};
use crate::policy::Policy;
use crate::rng::ExoRng;

/// Whether the learner sees the exogenous symbols of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationMode {
    Full,
    None,
}

/// One step as seen by a learner. Carries no exogenous symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub stage: usize,
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
    /// Environment-specific censored signal (e.g. units sold), if any.
    pub observation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    transitions: Vec<Transition>,
    exo: Option<Vec<usize>>,
}

impl Trajectory {
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Exogenous symbols, present only for full-observation episodes.
    pub fn exo_symbols(&self) -> Option<&[usize]> {
        self.exo.as_deref()
    }

    pub fn total_reward(&self) -> f64 {
        self.transitions.iter().map(|t| t.reward).sum()
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }
}

/// Runs one episode of `policy` from the start state. Exogenous symbols are
/// drawn from the spec's true distribution and kept only in `Full` mode.
pub fn rollout_episode(
    spec: &ExoMdpSpec,
    policy: &Policy,
    rng: &mut ExoRng,
    mode: ObservationMode,
) -> Trajectory {
    let horizon = spec.horizon();
    let member = policy.resolve(rng);
    let mut transitions = Vec::with_capacity(horizon);
    let mut exo = match mode {
        ObservationMode::Full => Some(Vec::with_capacity(horizon)),
        ObservationMode::None => None,
    };
    let mut s = spec.start_state();
    for h in 0..horizon {
        let a = member.act(h, s, rng);
        let xi = sample_exogenous(spec.exo_dist().at(h), rng);
        let next = spec.next_state(s, a, xi);
        transitions.push(Transition {
            stage: h,
            state: s,
            action: a,
            reward: spec.reward(s, a, xi),
            next_state: next,
            observation: spec.observation(s, a, xi),
        });
        if let Some(e) = exo.as_mut() {
            e.push(xi);
        }
        s = next;
    }
    Trajectory { transitions, exo }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ProbVec, SpecTables};
    use crate::policy::DeterministicPolicy;
    use crate::rng::{stream, Purpose};

    fn chain() -> ExoMdpSpec {
        // Two states; symbol 1 moves to state 1, which pays 1 forever.
        ExoMdpSpec::from_tables(SpecTables {
            n_states: 2,
            n_actions: 1,
            n_exo: 2,
            horizon: 6,
            start_state: 0,
            transitions: vec![0, 1, 1, 1],
            rewards: vec![0.0, 0.0, 1.0, 1.0],
            exo_dist: ProbVec::new(vec![0.4, 0.6]).unwrap().into(),
            observations: None,
        })
        .unwrap()
    }

    #[test]
    fn trajectory_is_consistent_with_step() {
        let spec = chain();
        let pi: Policy = DeterministicPolicy::constant(6, 2, 0).into();
        let mut rng = stream(5, Purpose::Environment, 0);
        let traj = rollout_episode(&spec, &pi, &mut rng, ObservationMode::Full);
        assert_eq!(traj.len(), 6);
        let exo = traj.exo_symbols().unwrap();
        let mut s = spec.start_state();
        for (t, &xi) in traj.transitions().iter().zip(exo) {
            assert_eq!(t.state, s);
            let (next, r) = spec.step(t.state, t.action, xi).unwrap();
            assert_eq!((t.next_state, t.reward), (next, r));
            s = next;
        }
        let ret = traj.total_reward();
        assert!((0.0..=6.0).contains(&ret));
    }

    #[test]
    fn hidden_mode_drops_symbols() {
        let spec = chain();
        let pi: Policy = DeterministicPolicy::constant(6, 2, 0).into();
        let mut rng = stream(5, Purpose::Environment, 0);
        let traj = rollout_episode(&spec, &pi, &mut rng, ObservationMode::None);
        assert!(traj.exo_symbols().is_none());
        assert_eq!(traj.len(), 6);
    }

    #[test]
    fn same_stream_same_episode() {
        let spec = chain();
        let pi: Policy = DeterministicPolicy::constant(6, 2, 0).into();
        let run = || rollout_episode(&spec, &pi, &mut stream(11, Purpose::Environment, 3), ObservationMode::Full);
        assert_eq!(run(), run());
    }
}
