//! Lower-bound instances built on the hypercube bandit.
//!
//! An action is a sign vector `Z in {-1, 1}^(d/2)`, played as the length-`d`
//! vector `a(Z) = (Z_1, -Z_1, Z_2, -Z_2, ..)`. The exogenous law puts mass
//! `1/d + c Z~_i` on symbol `2i` and `1/d - c Z~_i` on `2i + 1`, and the raw
//! reward of `a` under symbol `j` is `a_j in {-1, 1}`. Rewards are stored as
//! `(raw + 1) / 2`; [`to_raw_total`] undoes the map for whole episodes.
//!
//! Action index `k` encodes `Z_i = +1` iff bit `i` of `k` is clear.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ExoDist, ExoMdpSpec, ProbVec, SpecTables};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardInstanceParams {
    /// Alphabet size, even.
    pub d: usize,
    /// Planned number of episodes; fixes the signal strength `c`.
    pub episodes: usize,
    /// Latent sign vectors: one for the stationary instances, `H/2` for the
    /// stage-dependent one. Entries are `1` or `-1`.
    pub z_tilde: Vec<Vec<i8>>,
    pub horizon: usize,
}

impl HardInstanceParams {
    /// `c = sqrt(2 / (5K)) / 10`.
    pub fn c(&self) -> f64 {
        0.1 * (2.0 / (5.0 * self.episodes as f64)).sqrt()
    }

    fn validate(&self, n_latent: usize) -> Result<()> {
        if self.d == 0 || self.d % 2 != 0 {
            return Err(Error::InvalidParameter(format!("d = {} must be even and positive", self.d)));
        }
        if 10 * self.episodes < self.d * self.d {
            return Err(Error::InvalidParameter(format!(
                "K = {} is below d^2/10 = {}",
                self.episodes,
                self.d as f64 * self.d as f64 / 10.0
            )));
        }
        if self.d / 2 >= usize::BITS as usize || self.d / 2 > 20 {
            return Err(Error::Capacity {
                what: "hypercube action set",
                required: 1u128 << (self.d / 2).min(127),
                cap: 1 << 20,
            });
        }
        if self.z_tilde.len() != n_latent {
            return Err(Error::InvalidParameter(format!(
                "expected {n_latent} latent sign vectors, got {}",
                self.z_tilde.len()
            )));
        }
        for z in &self.z_tilde {
            if z.len() != self.d / 2 || z.iter().any(|&x| x != 1 && x != -1) {
                return Err(Error::InvalidParameter(format!(
                    "latent vectors must have d/2 = {} entries in {{-1, 1}}",
                    self.d / 2
                )));
            }
        }
        Ok(())
    }
}

/// Sign vector of action index `k` with `m` coordinates.
pub fn sign_vector(k: usize, m: usize) -> Vec<i8> {
    (0..m).map(|i| if (k >> i) & 1 == 0 { 1 } else { -1 }).collect()
}

/// Action index of sign vector `z`.
pub fn action_of(z: &[i8]) -> usize {
    z.iter().enumerate().filter(|(_, &x)| x < 0).map(|(i, _)| 1 << i).sum()
}

/// `a(Z)[j]`.
fn hypercube_entry(z: &[i8], j: usize) -> i8 {
    let zi = z[j / 2];
    if j % 2 == 0 {
        zi
    } else {
        -zi
    }
}

/// `p(Z~)`.
pub fn hypercube_law(z_tilde: &[i8], c: f64) -> Result<ProbVec> {
    let d = 2 * z_tilde.len();
    let base = 1.0 / d as f64;
    let probs = (0..d)
        .map(|j| base + c * hypercube_entry(z_tilde, j) as f64)
        .collect();
    ProbVec::new(probs)
}

fn stored(raw: f64) -> f64 {
    (raw + 1.0) / 2.0
}

/// Raw episode return from a stored one over `stages` stages.
pub fn to_raw_total(stored_total: f64, stages: usize) -> f64 {
    2.0 * stored_total - stages as f64
}

/// Single-stage hypercube bandit.
pub fn make_exo_bandit(params: &HardInstanceParams) -> Result<ExoMdpSpec> {
    params.validate(1)?;
    let (d, m) = (params.d, params.d / 2);
    let n_actions = 1 << m;
    let mut rewards = Vec::with_capacity(n_actions * d);
    for k in 0..n_actions {
        let z = sign_vector(k, m);
        rewards.extend((0..d).map(|j| stored(hypercube_entry(&z, j) as f64)));
    }
    ExoMdpSpec::from_tables(SpecTables {
        n_states: 1,
        n_actions,
        n_exo: d,
        horizon: 1,
        start_state: 0,
        transitions: vec![0; n_actions * d],
        rewards,
        exo_dist: hypercube_law(&params.z_tilde[0], params.c())?.into(),
        observations: None,
    })
}

/// Stationary instance: the first-stage bandit reward is locked in and paid
/// again at every later stage. State 0 is the start; `(h, r)` for
/// `h in 2..=H` has index `1 + 2 (h - 2) + [r = 1]`.
pub fn make_hard_stationary(params: &HardInstanceParams) -> Result<ExoMdpSpec> {
    params.validate(1)?;
    let (d, m, horizon) = (params.d, params.d / 2, params.horizon);
    if horizon < 2 {
        return Err(Error::InvalidParameter("horizon must be at least 2".into()));
    }
    let n_actions = 1 << m;
    let n_states = 1 + 2 * (horizon - 1);
    let idx = |h: usize, r: i8| 1 + 2 * (h - 2) + usize::from(r == 1);
    let mut transitions = Vec::with_capacity(n_states * n_actions * d);
    let mut rewards = Vec::with_capacity(n_states * n_actions * d);
    for k in 0..n_actions {
        let z = sign_vector(k, m);
        for j in 0..d {
            let r = hypercube_entry(&z, j);
            transitions.push(idx(2, r));
            rewards.push(stored(r as f64));
        }
    }
    for h in 2..=horizon {
        for r in [-1i8, 1] {
            let next = idx((h + 1).min(horizon), r);
            for _ in 0..n_actions * d {
                transitions.push(next);
                rewards.push(stored(r as f64));
            }
        }
    }
    ExoMdpSpec::from_tables(SpecTables {
        n_states,
        n_actions,
        n_exo: d,
        horizon,
        start_state: 0,
        transitions,
        rewards,
        exo_dist: hypercube_law(&params.z_tilde[0], params.c())?.into(),
        observations: None,
    })
}

/// Stage-dependent instance over `H + 1` stages.
///
/// Stage 0 draws a hidden index `i` uniformly from `1..=H/2` (the first
/// `H/2` symbols). At stage `h = i` the agent faces the bandit with latent
/// vector `Z~^h`; the resulting sign is carried along and paid at every stage
/// after `H/2`. States other than the start are `(h, i, r)` with
/// `r in {none, -1, 1}`, indexed `1 + 3 ((h - 1) H/2 + (i - 1)) + code(r)`.
pub fn make_hard_nonstationary(params: &HardInstanceParams) -> Result<ExoMdpSpec> {
    let horizon = params.horizon;
    if horizon < 2 || horizon % 2 != 0 {
        return Err(Error::InvalidParameter(format!("H = {horizon} must be even and positive")));
    }
    let half = horizon / 2;
    params.validate(half)?;
    let (d, m) = (params.d, params.d / 2);
    if d <= half {
        return Err(Error::InvalidParameter(format!("d = {d} must exceed H/2 = {half}")));
    }
    let n_actions = 1 << m;
    let n_states = 1 + 3 * horizon * half;
    let idx = |h: usize, i: usize, code: usize| 1 + 3 * ((h - 1) * half + (i - 1)) + code;
    let code = |r: i8| if r < 0 { 1 } else { 2 };
    let signs: Vec<Vec<i8>> = (0..n_actions).map(|k| sign_vector(k, m)).collect();

    let mut transitions = vec![0; n_states * n_actions * d];
    let mut rewards = vec![0.0; n_states * n_actions * d];
    let cell = |s: usize, a: usize, j: usize| (s * n_actions + a) * d + j;
    for a in 0..n_actions {
        for j in 0..d {
            // Symbols past the first H/2 have zero mass at stage 0.
            transitions[cell(0, a, j)] = idx(1, j.min(half - 1) + 1, 0);
            rewards[cell(0, a, j)] = stored(0.0);
        }
    }
    for h in 1..=horizon {
        let next_h = (h + 1).min(horizon);
        for i in 1..=half {
            for c in 0..3 {
                let s = idx(h, i, c);
                let carried: i8 = match c {
                    1 => -1,
                    2 => 1,
                    _ => 0,
                };
                let raw = if h <= half { 0.0 } else { carried as f64 };
                for a in 0..n_actions {
                    for j in 0..d {
                        let next = if c == 0 && h == i {
                            idx(next_h, i, code(hypercube_entry(&signs[a], j)))
                        } else {
                            idx(next_h, i, c)
                        };
                        transitions[cell(s, a, j)] = next;
                        rewards[cell(s, a, j)] = stored(raw);
                    }
                }
            }
        }
    }

    let c = params.c();
    let mut first = vec![0.0; d];
    first[..half].fill(1.0 / half as f64);
    let mut stages = vec![ProbVec::new(first)?];
    for z in &params.z_tilde {
        stages.push(hypercube_law(z, c)?);
    }
    while stages.len() < horizon + 1 {
        stages.push(ProbVec::uniform(d));
    }
    ExoMdpSpec::from_tables(SpecTables {
        n_states,
        n_actions,
        n_exo: d,
        horizon: horizon + 1,
        start_state: 0,
        transitions,
        rewards,
        exo_dist: ExoDist::PerStage(stages),
        observations: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{dp_solve, policy_value};
    use crate::policy::{DeterministicPolicy, Policy};
    use crate::rng::{stream, Purpose};
    use crate::rollout::{rollout_episode, ObservationMode};

    fn params(d: usize, h: usize, k: usize, z: Vec<Vec<i8>>) -> HardInstanceParams {
        HardInstanceParams {
            d,
            episodes: k,
            z_tilde: z,
            horizon: h,
        }
    }

    fn mismatches(a: &[i8], b: &[i8]) -> usize {
        a.iter().zip(b).filter(|(x, y)| x != y).count()
    }

    #[test]
    fn sign_vector_round_trip() {
        for k in 0..16 {
            assert_eq!(action_of(&sign_vector(k, 4)), k);
        }
        assert_eq!(sign_vector(0, 3), vec![1, 1, 1]);
    }

    #[test]
    fn bandit_success_probability() {
        let z_t = vec![1, -1, 1];
        let p = params(6, 1, 100, vec![z_t.clone()]);
        let spec = make_exo_bandit(&p).unwrap();
        let c = p.c();
        let delta = 0.5 - c * 6.0 / 2.0;
        let law = spec.exo_dist().at(0);
        for k in 0..spec.n_actions() {
            let z = sign_vector(k, 3);
            // Enumerate the symbols that pay +1.
            let p1: f64 = (0..6).filter(|&j| spec.reward(0, k, j) == 1.0).map(|j| law[j]).sum();
            let matches = 3 - mismatches(&z, &z_t);
            assert!((p1 - (delta + 2.0 * c * matches as f64)).abs() < 1e-12);
            let inner: f64 = z.iter().zip(&z_t).map(|(a, b)| (a * b) as f64).sum();
            assert!((p1 - (0.5 + c * inner)).abs() < 1e-12);
            let raw = 2.0 * p1 - 1.0;
            let best = c * 6.0;
            assert!((best - raw - 4.0 * c * mismatches(&z, &z_t) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn bandit_rejects_odd_d_and_small_k() {
        assert!(make_exo_bandit(&params(5, 1, 100, vec![vec![1, 1]])).is_err());
        assert!(make_exo_bandit(&params(8, 1, 2, vec![vec![1; 4]])).is_err());
    }

    #[test]
    fn stationary_value_and_gaps() {
        for (d, h, k) in [(4usize, 5usize, 100usize), (6, 8, 1000)] {
            let z_t: Vec<i8> = (0..d / 2).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
            let p = params(d, h, k, vec![z_t.clone()]);
            let spec = make_hard_stationary(&p).unwrap();
            let (pi, v) = dp_solve(&spec, spec.exo_dist());
            let c = p.c();
            assert!((to_raw_total(v.get(0, 0), h) - h as f64 * c * d as f64).abs() < 1e-9);
            assert_eq!(pi.action(0, 0), action_of(&z_t));
            for a in 0..spec.n_actions() {
                let first = DeterministicPolicy::from_fn(h, spec.n_states(), |t, _| if t == 0 { a } else { 0 });
                let val = policy_value(&spec, spec.exo_dist(), &first.into()).unwrap();
                let gap = to_raw_total(v.get(0, 0), h) - to_raw_total(val, h);
                let m = mismatches(&sign_vector(a, d / 2), &z_t);
                assert!((gap - 4.0 * c * h as f64 * m as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn stationary_rewards_repeat() {
        let p = params(4, 6, 100, vec![vec![1, -1]]);
        let spec = make_hard_stationary(&p).unwrap();
        let pi = Policy::Markov(crate::policy::MarkovPolicy::uniform(6, spec.n_states(), spec.n_actions()));
        for e in 0..50 {
            let traj = rollout_episode(&spec, &pi, &mut stream(2, Purpose::Environment, e), ObservationMode::Full);
            let r0 = traj.transitions()[0].reward;
            assert!(traj.transitions().iter().all(|t| t.reward == r0));
        }
    }

    #[test]
    fn later_actions_do_not_matter() {
        let p = params(4, 5, 100, vec![vec![1, 1]]);
        let spec = make_hard_stationary(&p).unwrap();
        let base = DeterministicPolicy::from_fn(5, spec.n_states(), |_, _| 0);
        let other = DeterministicPolicy::from_fn(5, spec.n_states(), |t, _| if t == 0 { 0 } else { 3 });
        let d = spec.exo_dist();
        assert_eq!(
            policy_value(&spec, d, &base.into()).unwrap(),
            policy_value(&spec, d, &other.into()).unwrap()
        );
    }

    fn nonstationary() -> (HardInstanceParams, ExoMdpSpec) {
        let z = vec![vec![1, -1, 1], vec![-1, -1, 1]];
        let p = params(6, 4, 100, z);
        let spec = make_hard_nonstationary(&p).unwrap();
        (p, spec)
    }

    #[test]
    fn nonstationary_optimum() {
        let (p, spec) = nonstationary();
        assert_eq!(spec.horizon(), 5);
        let (pi, v) = dp_solve(&spec, spec.exo_dist());
        let raw = to_raw_total(v.get(0, 0), 5);
        assert!((raw - 2.0 * p.c() * 6.0).abs() < 1e-9);
        // At stage i with index i and no result yet, play Z~^i.
        for i in 1..=2 {
            let s = 1 + 3 * ((i - 1) * 2 + (i - 1));
            assert_eq!(pi.action(i, s), action_of(&p.z_tilde[i - 1]));
        }
    }

    #[test]
    fn nonstationary_early_rewards_are_zero() {
        let (_, spec) = nonstationary();
        let pi = Policy::Markov(crate::policy::MarkovPolicy::uniform(5, spec.n_states(), spec.n_actions()));
        for e in 0..50 {
            let traj = rollout_episode(&spec, &pi, &mut stream(4, Purpose::Environment, e), ObservationMode::Full);
            for t in &traj.transitions()[..3] {
                assert_eq!(t.reward, 0.5);
            }
            let tail = &traj.transitions()[3..];
            assert!(tail.iter().all(|t| t.reward == tail[0].reward && t.reward != 0.5));
        }
    }

    #[test]
    fn nonstationary_preconditions() {
        assert!(make_hard_nonstationary(&params(4, 8, 100, vec![vec![1, 1]; 4])).is_err());
        assert!(make_hard_nonstationary(&params(6, 3, 100, vec![vec![1, 1, 1]])).is_err());
    }
}
