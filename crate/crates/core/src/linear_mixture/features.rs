use crate::model::{ExoMdpSpec, ProbVec};

/// Linear-mixture features of an Exo-MDP.
///
/// `phi_p(s' | s, a)[j] = 1` iff `f(s, a, j) = s'`, and `phi_r(s, a)[j] =
/// g(s, a, j)`, so that with `theta = p` the kernel and mean reward are
/// `phi_p . p` and `phi_r . p`. The transition features are stored through
/// the symbol-to-next-state map, which encodes the same 0/1 table without
/// materialising the mostly-zero `|S|^2 |A| x d` array.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    n_states: usize,
    n_actions: usize,
    n_exo: usize,
    next: Vec<usize>,
    reward: Vec<f64>,
}

/// Features of every `(s, a, s')` triple of `spec`.
pub fn build_features(spec: &ExoMdpSpec) -> FeatureSet {
    let (n_states, n_actions, n_exo) = (spec.n_states(), spec.n_actions(), spec.n_exo());
    let mut next = Vec::with_capacity(n_states * n_actions * n_exo);
    let mut reward = Vec::with_capacity(n_states * n_actions * n_exo);
    for s in 0..n_states {
        for a in 0..n_actions {
            next.extend_from_slice(spec.next_states(s, a));
            reward.extend_from_slice(spec.rewards(s, a));
        }
    }
    FeatureSet {
        n_states,
        n_actions,
        n_exo,
        next,
        reward,
    }
}

impl FeatureSet {
    pub fn n_states(&self) -> usize {
        self.n_states
    }
    pub fn n_actions(&self) -> usize {
        self.n_actions
    }
    /// Feature dimension `d`.
    pub fn dim(&self) -> usize {
        self.n_exo
    }

    #[inline]
    fn base(&self, s: usize, a: usize) -> usize {
        (s * self.n_actions + a) * self.n_exo
    }

    /// `phi_p(s' | s, a)` as a dense 0/1 vector.
    pub fn phi_p(&self, s: usize, a: usize, s_next: usize) -> Vec<f64> {
        let b = self.base(s, a);
        self.next[b..b + self.n_exo]
            .iter()
            .map(|&n| if n == s_next { 1.0 } else { 0.0 })
            .collect()
    }

    /// `phi_r(s, a)`.
    pub fn phi_r(&self, s: usize, a: usize) -> &[f64] {
        let b = self.base(s, a);
        &self.reward[b..b + self.n_exo]
    }

    /// Next state reached from `(s, a)` under each symbol.
    #[inline]
    pub fn symbol_targets(&self, s: usize, a: usize) -> &[usize] {
        let b = self.base(s, a);
        &self.next[b..b + self.n_exo]
    }

    /// Distinct next states reachable from `(s, a)`, ascending.
    pub fn support(&self, s: usize, a: usize) -> Vec<usize> {
        let mut v = self.symbol_targets(s, a).to_vec();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `phi_V(s, a) = sum_{s'} phi_p(s' | s, a) V(s')`, written into `out`.
    #[inline]
    pub fn phi_v(&self, s: usize, a: usize, values: &[f64], out: &mut [f64]) {
        for (o, &n) in out.iter_mut().zip(self.symbol_targets(s, a)) {
            *o = values[n];
        }
    }

    /// `phi_p(s' | s, a) . p`.
    pub fn transition_prob(&self, s: usize, a: usize, s_next: usize, p: &ProbVec) -> f64 {
        self.symbol_targets(s, a)
            .iter()
            .zip(p.as_slice())
            .filter(|(n, _)| **n == s_next)
            .map(|(_, pj)| pj)
            .sum()
    }

    /// `phi_r(s, a) . p`.
    pub fn mean_reward(&self, s: usize, a: usize, p: &ProbVec) -> f64 {
        self.phi_r(s, a)
            .iter()
            .zip(p.as_slice())
            .map(|(g, pj)| g * pj)
            .sum()
    }

    /// Moves symbol `j` of `(s, a)` to `s_next`; used to build corrupted
    /// feature tables in tests.
    #[cfg(test)]
    pub(crate) fn reassign(&mut self, s: usize, a: usize, j: usize, s_next: usize) {
        let b = self.base(s, a);
        self.next[b + j] = s_next;
    }
}

/// Largest deviation between the feature representation and a direct
/// computation of the kernel and mean rewards of `spec` under `p`.
pub fn verify_linear_representation(spec: &ExoMdpSpec, p: &ProbVec) -> f64 {
    verify_features(&build_features(spec), spec, p)
}

/// As [`verify_linear_representation`], for an arbitrary feature table.
pub fn verify_features(features: &FeatureSet, spec: &ExoMdpSpec, p: &ProbVec) -> f64 {
    let mut worst: f64 = 0.0;
    for s in 0..spec.n_states() {
        for a in 0..spec.n_actions() {
            let kernel = spec.kernel(s, a, p);
            for (s_next, &direct) in kernel.iter().enumerate() {
                let phi = features.phi_p(s, a, s_next);
                let linear: f64 = phi.iter().zip(p.as_slice()).map(|(x, y)| x * y).sum();
                worst = worst.max((linear - direct).abs());
            }
            let direct = spec.mean_reward(s, a, p);
            worst = worst.max((features.mean_reward(s, a, p) - direct).abs());
        }
    }
    worst
}
