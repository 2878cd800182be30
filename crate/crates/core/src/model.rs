//! The Exo-MDP data model: endogenous states driven by a known deterministic
//! map of (state, action, exogenous symbol), with the exogenous symbol drawn
//! i.i.d. from an unknown distribution at every stage.
//!
//! Stages are 0-based throughout the crate: an episode visits stages
//! `0..horizon`, and value tables carry one extra terminal row.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the total mass of a [`ProbVec`].
pub const PROB_SUM_TOL: f64 = 1e-12;

/// A probability vector over the exogenous alphabet `0..d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVec(Vec<f64>);

impl ProbVec {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if let Some((j, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {j} is {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(Self(probs))
    }

    /// Rescales non-negative weights to unit mass.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidDistribution(
                "weights must be non-negative with positive total".into(),
            ));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(d: usize) -> Self {
        assert!(d > 0, "uniform distribution over an empty alphabet");
        Self(vec![1.0 / d as f64; d])
    }

    pub fn point_mass(d: usize, j: usize) -> Self {
        assert!(j < d, "point mass at {j} outside alphabet of size {d}");
        let mut v = vec![0.0; d];
        v[j] = 1.0;
        Self(v)
    }

    /// Empirical distribution of `counts`; uniform when no symbol was seen.
    pub fn from_counts(counts: &[u64]) -> Self {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Self::uniform(counts.len());
        }
        Self(counts.iter().map(|&c| c as f64 / total as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn l1_distance(&self, other: &ProbVec) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Smallest strictly positive entry.
    pub fn min_positive(&self) -> f64 {
        self.0
            .iter()
            .copied()
            .filter(|p| *p > 0.0)
            .fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<f64>> for ProbVec {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbVec> for Vec<f64> {
    fn from(p: ProbVec) -> Self {
        p.0
    }
}

impl std::ops::Index<usize> for ProbVec {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

/// Draws an exogenous symbol by inverting the cumulative distribution with a
/// single uniform draw. Zero-mass symbols are never returned.
pub fn sample_exogenous<R: Rng + ?Sized>(p: &ProbVec, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (j, &pj) in p.0.iter().enumerate() {
        if pj > 0.0 {
            cum += pj;
            last_positive = j;
            if u < cum {
                return j;
            }
        }
    }
    last_positive
}

/// Exogenous distribution, shared by all stages or given per stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExoDist {
    Homogeneous(ProbVec),
    PerStage(Vec<ProbVec>),
}

impl ExoDist {
    pub fn at(&self, stage: usize) -> &ProbVec {
        match self {
            ExoDist::Homogeneous(p) => p,
            ExoDist::PerStage(ps) => &ps[stage],
        }
    }

    pub fn support_size(&self) -> usize {
        self.at(0).len()
    }

    fn check(&self, n_exo: usize, horizon: usize) -> Result<()> {
        let all: Vec<&ProbVec> = match self {
            ExoDist::Homogeneous(p) => vec![p],
            ExoDist::PerStage(ps) => {
                if ps.len() != horizon {
                    return Err(Error::InvalidSpec(format!(
                        "{} per-stage distributions for horizon {horizon}",
                        ps.len()
                    )));
                }
                ps.iter().collect()
            }
        };
        match all.iter().find(|p| p.len() != n_exo) {
            Some(p) => Err(Error::InvalidSpec(format!(
                "distribution of length {} over an alphabet of size {n_exo}",
                p.len()
            ))),
            None => Ok(()),
        }
    }
}

impl From<ProbVec> for ExoDist {
    fn from(p: ProbVec) -> Self {
        ExoDist::Homogeneous(p)
    }
}

/// Raw tables used to build an [`ExoMdpSpec`]. All `[s][a][xi]` tables are
/// flattened row-major.
#[derive(Debug, Clone)]
pub struct SpecTables {
    pub n_states: usize,
    pub n_actions: usize,
    pub n_exo: usize,
    pub horizon: usize,
    pub start_state: usize,
    pub transitions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub exo_dist: ExoDist,
    /// What a learner sees in place of the exogenous symbol when it is
    /// hidden (e.g. censored sales), if anything.
    pub observations: Option<Vec<usize>>,
}

/// A validated, immutable Exo-MDP.
#[derive(Debug, Clone, PartialEq)]
pub struct ExoMdpSpec {
    n_states: usize,
    n_actions: usize,
    n_exo: usize,
    horizon: usize,
    start_state: usize,
    transitions: Vec<usize>,
    rewards: Vec<f64>,
    exo_dist: ExoDist,
    observations: Option<Vec<usize>>,
}

impl ExoMdpSpec {
    pub fn from_tables(t: SpecTables) -> Result<Self> {
        if t.n_states == 0 || t.n_actions == 0 || t.n_exo == 0 || t.horizon == 0 {
            return Err(Error::InvalidSpec(
                "state, action, exogenous and stage counts must be positive".into(),
            ));
        }
        if t.start_state >= t.n_states {
            return Err(Error::IndexOutOfRange {
                what: "start state",
                index: t.start_state,
                size: t.n_states,
            });
        }
        let cells = t.n_states * t.n_actions * t.n_exo;
        if t.transitions.len() != cells || t.rewards.len() != cells {
            return Err(Error::InvalidSpec(format!(
                "tables must have {cells} entries (got {} transitions, {} rewards)",
                t.transitions.len(),
                t.rewards.len()
            )));
        }
        if let Some(&bad) = t.transitions.iter().find(|&&s| s >= t.n_states) {
            return Err(Error::IndexOutOfRange {
                what: "next state",
                index: bad,
                size: t.n_states,
            });
        }
        if let Some(&bad) = t.rewards.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::InvalidSpec(format!("reward {bad} outside [0, 1]")));
        }
        if let Some(obs) = &t.observations {
            if obs.len() != cells {
                return Err(Error::InvalidSpec("observation table has wrong size".into()));
            }
        }
        t.exo_dist.check(t.n_exo, t.horizon)?;
        Ok(Self {
            n_states: t.n_states,
            n_actions: t.n_actions,
            n_exo: t.n_exo,
            horizon: t.horizon,
            start_state: t.start_state,
            transitions: t.transitions,
            rewards: t.rewards,
            exo_dist: t.exo_dist,
            observations: t.observations,
        })
    }

    /// Same dynamics under a different exogenous distribution (the model a
    /// plug-in learner plans in).
    pub fn with_exo_dist(&self, exo_dist: ExoDist) -> Result<Self> {
        exo_dist.check(self.n_exo, self.horizon)?;
        Ok(Self {
            exo_dist,
            ..self.clone()
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }
    pub fn n_actions(&self) -> usize {
        self.n_actions
    }
    pub fn n_exo(&self) -> usize {
        self.n_exo
    }
    pub fn horizon(&self) -> usize {
        self.horizon
    }
    pub fn start_state(&self) -> usize {
        self.start_state
    }
    pub fn exo_dist(&self) -> &ExoDist {
        &self.exo_dist
    }
    pub fn is_time_homogeneous(&self) -> bool {
        matches!(self.exo_dist, ExoDist::Homogeneous(_))
    }
    pub fn has_observations(&self) -> bool {
        self.observations.is_some()
    }

    #[inline]
    fn cell(&self, s: usize, a: usize, xi: usize) -> usize {
        (s * self.n_actions + a) * self.n_exo + xi
    }

    /// `f(s, a, xi)` without bounds checks beyond slice indexing.
    #[inline]
    pub fn next_state(&self, s: usize, a: usize, xi: usize) -> usize {
        self.transitions[self.cell(s, a, xi)]
    }

    /// `g(s, a, xi)`.
    #[inline]
    pub fn reward(&self, s: usize, a: usize, xi: usize) -> f64 {
        self.rewards[self.cell(s, a, xi)]
    }

    /// Next states of `(s, a)` indexed by exogenous symbol.
    #[inline]
    pub fn next_states(&self, s: usize, a: usize) -> &[usize] {
        let base = self.cell(s, a, 0);
        &self.transitions[base..base + self.n_exo]
    }

    /// Rewards of `(s, a)` indexed by exogenous symbol.
    #[inline]
    pub fn rewards(&self, s: usize, a: usize) -> &[f64] {
        let base = self.cell(s, a, 0);
        &self.rewards[base..base + self.n_exo]
    }

    pub fn observation(&self, s: usize, a: usize, xi: usize) -> Option<usize> {
        self.observations.as_ref().map(|o| o[self.cell(s, a, xi)])
    }

    /// One transition: `(f(s, a, xi), g(s, a, xi))`.
    pub fn step(&self, s: usize, a: usize, xi: usize) -> Result<(usize, f64)> {
        self.check_state(s)?;
        self.check_action(a)?;
        if xi >= self.n_exo {
            return Err(Error::IndexOutOfRange {
                what: "exogenous symbol",
                index: xi,
                size: self.n_exo,
            });
        }
        Ok((self.next_state(s, a, xi), self.reward(s, a, xi)))
    }

    pub(crate) fn check_state(&self, s: usize) -> Result<()> {
        if s >= self.n_states {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: s,
                size: self.n_states,
            });
        }
        Ok(())
    }

    pub(crate) fn check_action(&self, a: usize) -> Result<()> {
        if a >= self.n_actions {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: a,
                size: self.n_actions,
            });
        }
        Ok(())
    }

    /// Induced kernel `P(. | s, a)` under `p`.
    pub fn kernel(&self, s: usize, a: usize, p: &ProbVec) -> Vec<f64> {
        let mut out = vec![0.0; self.n_states];
        for (j, &next) in self.next_states(s, a).iter().enumerate() {
            out[next] += p[j];
        }
        out
    }

    /// Expected reward `sum_j p[j] g(s, a, j)`.
    pub fn mean_reward(&self, s: usize, a: usize, p: &ProbVec) -> f64 {
        self.rewards(s, a)
            .iter()
            .zip(p.as_slice())
            .map(|(g, pj)| g * pj)
            .sum()
    }
}
