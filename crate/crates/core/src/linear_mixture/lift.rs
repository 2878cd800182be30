use crate::error::{Error, Result};
use crate::model::{ExoMdpSpec, ProbVec, SpecTables};

/// Default cap on the (pruned) exogenous alphabet of a lifted MDP.
pub const DEFAULT_LIFT_CAP: usize = 1_000_000;

/// A finite-horizon MDP given by its kernel and a finite reward law.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    pub n_states: usize,
    pub n_actions: usize,
    pub horizon: usize,
    pub start_state: usize,
    /// `transition[(s * n_actions + a) * n_states + s']`.
    pub transition: Vec<f64>,
    /// Reward values, each in `[0, 1]`.
    pub reward_support: Vec<f64>,
    /// `reward_probs[(s * n_actions + a) * reward_support.len() + k]`.
    pub reward_probs: Vec<f64>,
}

impl TabularMdp {
    pub fn kernel(&self, s: usize, a: usize) -> &[f64] {
        let b = (s * self.n_actions + a) * self.n_states;
        &self.transition[b..b + self.n_states]
    }

    pub fn reward_law(&self, s: usize, a: usize) -> &[f64] {
        let m = self.reward_support.len();
        let b = (s * self.n_actions + a) * m;
        &self.reward_probs[b..b + m]
    }

    pub fn mean_reward(&self, s: usize, a: usize) -> f64 {
        self.reward_law(s, a)
            .iter()
            .zip(&self.reward_support)
            .map(|(p, r)| p * r)
            .sum()
    }

    /// Optimal value from the start state by backward induction on the kernel.
    pub fn optimal_value(&self) -> f64 {
        let mut v = vec![0.0; self.n_states];
        for _ in 0..self.horizon {
            let mut nv = vec![f64::NEG_INFINITY; self.n_states];
            for (s, slot) in nv.iter_mut().enumerate() {
                for a in 0..self.n_actions {
                    let q = self.mean_reward(s, a)
                        + self.kernel(s, a).iter().zip(&v).map(|(p, x)| p * x).sum::<f64>();
                    *slot = slot.max(q);
                }
            }
            v = nv;
        }
        v[self.start_state]
    }

    fn validate(&self) -> Result<()> {
        let (s, a, m) = (self.n_states, self.n_actions, self.reward_support.len());
        if s == 0 || a == 0 || m == 0 || self.horizon == 0 {
            return Err(Error::InvalidSpec("empty tabular MDP".into()));
        }
        if self.transition.len() != s * a * s || self.reward_probs.len() != s * a * m {
            return Err(Error::InvalidSpec("tabular MDP tables have the wrong size".into()));
        }
        for sa in 0..s * a {
            ProbVec::new(self.transition[sa * s..(sa + 1) * s].to_vec())?;
            ProbVec::new(self.reward_probs[sa * m..(sa + 1) * m].to_vec())?;
        }
        Ok(())
    }
}

/// A lifted MDP and the size of the unpruned exogenous product space.
#[derive(Debug, Clone)]
pub struct Lifted {
    pub spec: ExoMdpSpec,
    /// `|S|^(|S||A|) * |R|^(|S||A|)`, saturating.
    pub full_alphabet: u128,
}

/// Recasts `mdp` as an Exo-MDP whose exogenous symbol fixes, for every
/// `(s, a)` at once, the next state and the reward index. Coordinates are
/// independent with the source laws as marginals; zero-probability tuples
/// are dropped. `cap` bounds the size of the pruned alphabet.
pub fn lift_discrete_mdp(mdp: &TabularMdp, cap: usize) -> Result<Lifted> {
    mdp.validate()?;
    let (n_s, n_a, n_r) = (mdp.n_states, mdp.n_actions, mdp.reward_support.len());
    let pairs = n_s * n_a;
    let full_alphabet = (n_s as u128)
        .checked_pow(pairs as u32)
        .and_then(|x| (n_r as u128).checked_pow(pairs as u32).and_then(|y| x.checked_mul(y)))
        .unwrap_or(u128::MAX);

    // Coordinate c < pairs picks the next state of pair c; coordinate
    // pairs + c picks its reward index. Each keeps only its positive support.
    let mut supports: Vec<Vec<(usize, f64)>> = Vec::with_capacity(2 * pairs);
    for s in 0..n_s {
        for a in 0..n_a {
            supports.push(positive(mdp.kernel(s, a)));
        }
    }
    for s in 0..n_s {
        for a in 0..n_a {
            supports.push(positive(mdp.reward_law(s, a)));
        }
    }
    let pruned = supports
        .iter()
        .try_fold(1u128, |acc, s| acc.checked_mul(s.len() as u128))
        .unwrap_or(u128::MAX);
    if pruned > cap as u128 {
        return Err(Error::Capacity {
            what: "lifted exogenous alphabet",
            required: pruned,
            cap: cap as u128,
        });
    }
    let d = pruned as usize;

    let mut probs = Vec::with_capacity(d);
    let mut transitions = vec![0; pairs * d];
    let mut rewards = vec![0.0; pairs * d];
    let mut digits = vec![0usize; supports.len()];
    for xi in 0..d {
        let mut prob = 1.0;
        for (c, &k) in digits.iter().enumerate() {
            let (value, p) = supports[c][k];
            prob *= p;
            if c < pairs {
                transitions[c * d + xi] = value;
            } else {
                rewards[(c - pairs) * d + xi] = mdp.reward_support[value];
            }
        }
        probs.push(prob);
        // Mixed-radix increment, last coordinate fastest.
        for c in (0..digits.len()).rev() {
            digits[c] += 1;
            if digits[c] < supports[c].len() {
                break;
            }
            digits[c] = 0;
        }
    }
    // The product of normalised marginals sums to one up to rounding.
    let exo = ProbVec::from_weights(&probs)?;
    let spec = ExoMdpSpec::from_tables(SpecTables {
        n_states: n_s,
        n_actions: n_a,
        n_exo: d,
        horizon: mdp.horizon,
        start_state: mdp.start_state,
        transitions,
        rewards,
        exo_dist: exo.into(),
        observations: None,
    })?;
    Ok(Lifted {
        spec,
        full_alphabet,
    })
}

fn positive(law: &[f64]) -> Vec<(usize, f64)> {
    law.iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(i, p)| (i, *p))
        .collect()
}
