//! Plug-in learner: estimate the exogenous law from observed symbols and
//! act optimally for the estimate.

use super::Learner;
use crate::dp::dp_solve;
use crate::error::{Error, Result};
use crate::model::{ExoDist, ExoMdpSpec, ProbVec};
use crate::policy::{DeterministicPolicy, Policy};
use crate::rollout::Trajectory;

/// Symbol counts, pooled over stages for time-homogeneous structures and
/// kept per stage otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PlugInState {
    pub counts: Vec<Vec<u64>>,
    pub total: u64,
}

impl PlugInState {
    /// Current estimate; uniform before any observation.
    pub fn estimate(&self) -> ExoDist {
        let est: Vec<ProbVec> = self.counts.iter().map(|c| ProbVec::from_counts(c)).collect();
        if est.len() == 1 {
            ExoDist::Homogeneous(est.into_iter().next().expect("one estimate"))
        } else {
            ExoDist::PerStage(est)
        }
    }
}

pub struct PlugIn {
    structure: ExoMdpSpec,
    state: PlugInState,
    policy: Option<DeterministicPolicy>,
}

impl PlugIn {
    /// `structure` supplies `f` and `g`; whether it is time-homogeneous
    /// decides if counts are pooled across stages.
    pub fn new(structure: &ExoMdpSpec) -> Self {
        let groups = if structure.is_time_homogeneous() { 1 } else { structure.horizon() };
        Self {
            structure: structure.clone(),
            state: PlugInState {
                counts: vec![vec![0; structure.n_exo()]; groups],
                total: 0,
            },
            policy: None,
        }
    }

    pub fn state(&self) -> &PlugInState {
        &self.state
    }

    pub fn estimate(&self) -> ExoDist {
        self.state.estimate()
    }
}

impl Learner for PlugIn {
    fn policy(&mut self) -> Result<Policy> {
        if self.policy.is_none() {
            let (pi, _) = dp_solve(&self.structure, &self.state.estimate());
            self.policy = Some(pi);
        }
        Ok(self.policy.clone().expect("policy just set").into())
    }

    fn observe(&mut self, traj: &Trajectory) -> Result<()> {
        let symbols = traj.exo_symbols().ok_or(Error::ObservationMode { learner: "plug_in" })?;
        let pooled = self.state.counts.len() == 1;
        for (h, &xi) in symbols.iter().enumerate() {
            let g = if pooled { 0 } else { h };
            self.state.counts[g][xi] += 1;
            self.state.total += 1;
        }
        self.policy = None;
        Ok(())
    }
}

/// L1 radius of the empirical law after `n` draws over `d` symbols, at
/// confidence `1 - delta` uniformly over `episodes` episodes.
pub fn l1_radius(d: usize, n: u64, episodes: usize, delta: f64) -> f64 {
    (4.0 * (d as f64 + 2.0 * (2.0 * episodes as f64 / delta).ln()) / n as f64).sqrt()
}
