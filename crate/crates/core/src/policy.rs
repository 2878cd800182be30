//! Tabular policies.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::ExoMdpSpec;

/// `actions[h * n_states + s]` is the action taken in state `s` at stage `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicPolicy {
    horizon: usize,
    n_states: usize,
    actions: Vec<usize>,
}

impl DeterministicPolicy {
    pub fn new(horizon: usize, n_states: usize, actions: Vec<usize>) -> Result<Self> {
        if actions.len() != horizon * n_states {
            return Err(Error::InvalidParameter(format!(
                "policy table has {} entries, expected {}",
                actions.len(),
                horizon * n_states
            )));
        }
        Ok(Self {
            horizon,
            n_states,
            actions,
        })
    }

    /// Same action everywhere.
    pub fn constant(horizon: usize, n_states: usize, action: usize) -> Self {
        Self {
            horizon,
            n_states,
            actions: vec![action; horizon * n_states],
        }
    }

    /// Builds the table from `rule(stage, state)`.
    pub fn from_fn(horizon: usize, n_states: usize, rule: impl Fn(usize, usize) -> usize) -> Self {
        let mut actions = Vec::with_capacity(horizon * n_states);
        for h in 0..horizon {
            for s in 0..n_states {
                actions.push(rule(h, s));
            }
        }
        Self {
            horizon,
            n_states,
            actions,
        }
    }

    #[inline]
    pub fn action(&self, stage: usize, state: usize) -> usize {
        self.actions[stage * self.n_states + state]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.actions
    }

    pub(crate) fn set(&mut self, stage: usize, state: usize, action: usize) {
        self.actions[stage * self.n_states + state] = action;
    }
}

/// Per-stage randomised decision rule: `probs[(h * n_states + s) * n_actions + a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovPolicy {
    horizon: usize,
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

impl MarkovPolicy {
    pub fn uniform(horizon: usize, n_states: usize, n_actions: usize) -> Self {
        Self {
            horizon,
            n_states,
            n_actions,
            probs: vec![1.0 / n_actions as f64; horizon * n_states * n_actions],
        }
    }

    pub fn new(horizon: usize, n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != horizon * n_states * n_actions {
            return Err(Error::InvalidParameter("stochastic policy table has wrong size".into()));
        }
        for row in probs.chunks(n_actions) {
            let total: f64 = row.iter().sum();
            if row.iter().any(|p| *p < 0.0) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(
                    "stochastic policy rows must be distributions".into(),
                ));
            }
        }
        Ok(Self {
            horizon,
            n_states,
            n_actions,
            probs,
        })
    }

    #[inline]
    pub fn distribution(&self, stage: usize, state: usize) -> &[f64] {
        let base = (stage * self.n_states + state) * self.n_actions;
        &self.probs[base..base + self.n_actions]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }
}

/// Any policy the crate can evaluate exactly or roll out.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Deterministic(DeterministicPolicy),
    Markov(MarkovPolicy),
    /// Draws one member uniformly at the start of each episode and follows it
    /// for the whole episode.
    Mixture(Vec<Policy>),
}

impl Policy {
    pub fn horizon(&self) -> usize {
        match self {
            Policy::Deterministic(p) => p.horizon,
            Policy::Markov(p) => p.horizon,
            Policy::Mixture(ms) => ms[0].horizon(),
        }
    }

    pub fn n_states(&self) -> usize {
        match self {
            Policy::Deterministic(p) => p.n_states,
            Policy::Markov(p) => p.n_states,
            Policy::Mixture(ms) => ms[0].n_states(),
        }
    }

    /// Picks the member that governs one episode (identity for non-mixtures).
    pub fn resolve<R: Rng + ?Sized>(&self, rng: &mut R) -> &Policy {
        match self {
            Policy::Mixture(ms) => ms[rng.random_range(0..ms.len())].resolve(rng),
            p => p,
        }
    }

    /// Action at `(stage, state)` for a resolved policy.
    pub fn act<R: Rng + ?Sized>(&self, stage: usize, state: usize, rng: &mut R) -> usize {
        match self {
            Policy::Deterministic(p) => p.action(stage, state),
            Policy::Markov(p) => {
                let u: f64 = rng.random();
                let dist = p.distribution(stage, state);
                let mut cum = 0.0;
                for (a, &w) in dist.iter().enumerate() {
                    cum += w;
                    if u < cum {
                        return a;
                    }
                }
                dist.iter().rposition(|w| *w > 0.0).unwrap_or(0)
            }
            Policy::Mixture(_) => self.resolve(rng).act(stage, state, rng),
        }
    }

    /// Checks that the policy fits `spec` (shape and action range).
    pub fn check_against(&self, spec: &ExoMdpSpec) -> Result<()> {
        if self.horizon() != spec.horizon() || self.n_states() != spec.n_states() {
            return Err(Error::InvalidParameter(format!(
                "policy shape {}x{} does not match spec {}x{}",
                self.horizon(),
                self.n_states(),
                spec.horizon(),
                spec.n_states()
            )));
        }
        match self {
            Policy::Deterministic(p) => match p.actions.iter().find(|&&a| a >= spec.n_actions()) {
                Some(&a) => spec.check_action(a),
                None => Ok(()),
            },
            Policy::Markov(p) if p.n_actions != spec.n_actions() => Err(Error::InvalidParameter(
                "stochastic policy action count does not match spec".into(),
            )),
            Policy::Markov(_) => Ok(()),
            Policy::Mixture(ms) => ms.iter().try_for_each(|m| m.check_against(spec)),
        }
    }
}

impl From<DeterministicPolicy> for Policy {
    fn from(p: DeterministicPolicy) -> Self {
        Policy::Deterministic(p)
    }
}

impl From<MarkovPolicy> for Policy {
    fn from(p: MarkovPolicy) -> Self {
        Policy::Markov(p)
    }
}

/// Episode-level uniform mixture of `policies`. Its exact value is the
/// average of the member values.
pub fn uniform_mixture_policy(policies: Vec<Policy>) -> Result<Policy> {
    let first = policies.first().ok_or(Error::EmptyPolicyList)?;
    let (h, s) = (first.horizon(), first.n_states());
    if policies.iter().any(|p| p.horizon() != h || p.n_states() != s) {
        return Err(Error::InvalidParameter(
            "mixture members must share horizon and state count".into(),
        ));
    }
    Ok(Policy::Mixture(policies))
}
