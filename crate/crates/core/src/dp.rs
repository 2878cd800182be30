//! Exact backward induction: optimal planning and policy evaluation.

use crate::error::Result;
use crate::exec::Exec;
use crate::model::{ExoDist, ExoMdpSpec, ProbVec};
use crate::policy::{DeterministicPolicy, MarkovPolicy, Policy};

/// `V[h][s]` for `h in 0..=horizon`; the terminal row is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    horizon: usize,
    n_states: usize,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn zeros(horizon: usize, n_states: usize) -> Self {
        Self {
            horizon,
            n_states,
            values: vec![0.0; (horizon + 1) * n_states],
        }
    }

    #[inline]
    pub fn get(&self, stage: usize, state: usize) -> f64 {
        self.values[stage * self.n_states + state]
    }

    pub fn stage(&self, stage: usize) -> &[f64] {
        &self.values[stage * self.n_states..(stage + 1) * self.n_states]
    }

    pub(crate) fn stage_mut(&mut self, stage: usize) -> &mut [f64] {
        &mut self.values[stage * self.n_states..(stage + 1) * self.n_states]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

#[inline]
fn q_value(spec: &ExoMdpSpec, p: &ProbVec, next: &[f64], s: usize, a: usize) -> f64 {
    let nexts = spec.next_states(s, a);
    let rewards = spec.rewards(s, a);
    let mut q = 0.0;
    for j in 0..nexts.len() {
        let pj = p[j];
        if pj != 0.0 {
            q += pj * (rewards[j] + next[nexts[j]]);
        }
    }
    q
}

/// Greedy action with the smallest index among exact ties.
#[inline]
pub(crate) fn argmax_first(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (a, q) in values.enumerate() {
        if q > best.1 {
            best = (a, q);
        }
    }
    best
}

/// Optimal policy and values of `spec` when the exogenous law is `dist`.
pub fn dp_solve(spec: &ExoMdpSpec, dist: &ExoDist) -> (DeterministicPolicy, ValueTable) {
    dp_solve_with(spec, dist, Exec::default())
}

pub fn dp_solve_with(
    spec: &ExoMdpSpec,
    dist: &ExoDist,
    exec: Exec,
) -> (DeterministicPolicy, ValueTable) {
    let (horizon, n_states, n_actions) = (spec.horizon(), spec.n_states(), spec.n_actions());
    let mut values = ValueTable::zeros(horizon, n_states);
    let mut policy = DeterministicPolicy::constant(horizon, n_states, 0);
    let mut stage_best = vec![(0usize, 0.0f64); n_states];
    for h in (0..horizon).rev() {
        let p = dist.at(h);
        let next = values.stage(h + 1).to_vec();
        exec.fill(&mut stage_best, |s| {
            argmax_first((0..n_actions).map(|a| q_value(spec, p, &next, s, a)))
        });
        let row = values.stage_mut(h);
        for (s, &(a, v)) in stage_best.iter().enumerate() {
            row[s] = v;
            policy.set(h, s, a);
        }
    }
    (policy, values)
}

/// Exact value table of a deterministic or per-stage randomised policy.
pub fn policy_values(spec: &ExoMdpSpec, dist: &ExoDist, policy: &Policy) -> Result<ValueTable> {
    policy.check_against(spec)?;
    let (horizon, n_states) = (spec.horizon(), spec.n_states());
    let mut values = ValueTable::zeros(horizon, n_states);
    match policy {
        Policy::Deterministic(pi) => evaluate_deterministic(spec, dist, pi, &mut values),
        Policy::Markov(pi) => evaluate_markov(spec, dist, pi, &mut values),
        Policy::Mixture(members) => {
            // State-wise average of member values; exact because the member is
            // fixed for a whole episode.
            let mut acc = vec![0.0; (horizon + 1) * n_states];
            for m in members {
                let v = policy_values(spec, dist, m)?;
                acc.iter_mut().zip(&v.values).for_each(|(a, b)| *a += b);
            }
            let n = members.len() as f64;
            values.values = acc.into_iter().map(|x| x / n).collect();
        }
    }
    Ok(values)
}

fn evaluate_deterministic(
    spec: &ExoMdpSpec,
    dist: &ExoDist,
    pi: &DeterministicPolicy,
    values: &mut ValueTable,
) {
    for h in (0..spec.horizon()).rev() {
        let p = dist.at(h);
        let next = values.stage(h + 1).to_vec();
        let row = values.stage_mut(h);
        for (s, v) in row.iter_mut().enumerate() {
            *v = q_value(spec, p, &next, s, pi.action(h, s));
        }
    }
}

fn evaluate_markov(spec: &ExoMdpSpec, dist: &ExoDist, pi: &MarkovPolicy, values: &mut ValueTable) {
    for h in (0..spec.horizon()).rev() {
        let p = dist.at(h);
        let next = values.stage(h + 1).to_vec();
        let row = values.stage_mut(h);
        for (s, v) in row.iter_mut().enumerate() {
            *v = pi
                .distribution(h, s)
                .iter()
                .enumerate()
                .filter(|(_, w)| **w > 0.0)
                .map(|(a, w)| w * q_value(spec, p, &next, s, a))
                .sum();
        }
    }
}

/// `V_1^pi(s_1)` under `dist`, computed exactly.
pub fn policy_value(spec: &ExoMdpSpec, dist: &ExoDist, policy: &Policy) -> Result<f64> {
    Ok(policy_values(spec, dist, policy)?.get(0, spec.start_state()))
}

/// Upper bound on the value gap of a fixed policy between two models whose
/// per-step rewards differ by at most `eps_r` and whose kernels differ by at
/// most `eps_p` in total variation (L1).
pub fn simulation_gap_bound(eps_r: f64, eps_p: f64, horizon: usize) -> f64 {
    let h = horizon as f64;
    h * eps_r + h * (h - 1.0) / 2.0 * eps_p
}
