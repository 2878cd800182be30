#![allow(dead_code)]

use exo_mdp::{stream, DeterministicPolicy, ExoMdpSpec, ProbVec, Purpose, SpecTables};
use rand::Rng;

pub fn random_probvec<R: Rng>(rng: &mut R, d: usize) -> ProbVec {
    let w: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
    ProbVec::from_weights(&w).unwrap()
}

pub fn random_spec_with<R: Rng>(rng: &mut R, n_s: usize, n_a: usize, d: usize, horizon: usize) -> ExoMdpSpec {
    let cells = n_s * n_a * d;
    ExoMdpSpec::from_tables(SpecTables {
        n_states: n_s,
        n_actions: n_a,
        n_exo: d,
        horizon,
        start_state: 0,
        transitions: (0..cells).map(|_| rng.random_range(0..n_s)).collect(),
        rewards: (0..cells).map(|_| rng.random_range(0.0..1.0)).collect(),
        exo_dist: random_probvec(rng, d).into(),
        observations: None,
    })
    .unwrap()
}

/// Random spec of bounded size drawn from `seed`.
pub fn random_spec(seed: u64, max_s: usize, max_a: usize, max_d: usize, max_h: usize) -> ExoMdpSpec {
    let mut rng = stream(seed, Purpose::Auxiliary, 7);
    let n_s = rng.random_range(1..=max_s);
    let n_a = rng.random_range(1..=max_a);
    let d = rng.random_range(1..=max_d);
    let h = rng.random_range(1..=max_h);
    random_spec_with(&mut rng, n_s, n_a, d, h)
}

/// Every deterministic policy of `spec`, in lexicographic order.
pub fn all_policies(spec: &ExoMdpSpec) -> impl Iterator<Item = DeterministicPolicy> + '_ {
    let cells = spec.horizon() * spec.n_states();
    let n_a = spec.n_actions();
    let total = n_a.pow(cells as u32);
    (0..total).map(move |mut code| {
        let mut actions = vec![0; cells];
        for slot in actions.iter_mut() {
            *slot = code % n_a;
            code /= n_a;
        }
        DeterministicPolicy::new(spec.horizon(), spec.n_states(), actions).unwrap()
    })
}

/// `spec` with exogenous symbol `j` renamed to `perm[j]`.
pub fn relabel(spec: &ExoMdpSpec, perm: &[usize]) -> ExoMdpSpec {
    let (n_s, n_a, d) = (spec.n_states(), spec.n_actions(), spec.n_exo());
    let mut transitions = vec![0; n_s * n_a * d];
    let mut rewards = vec![0.0; n_s * n_a * d];
    for s in 0..n_s {
        for a in 0..n_a {
            for (j, &pj) in perm.iter().enumerate() {
                let i = (s * n_a + a) * d + pj;
                transitions[i] = spec.next_state(s, a, j);
                rewards[i] = spec.reward(s, a, j);
            }
        }
    }
    let p = spec.exo_dist().at(0);
    let mut q = vec![0.0; d];
    for (j, &pj) in perm.iter().enumerate() {
        q[pj] = p[j];
    }
    ExoMdpSpec::from_tables(SpecTables {
        n_states: n_s,
        n_actions: n_a,
        n_exo: d,
        horizon: spec.horizon(),
        start_state: spec.start_state(),
        transitions,
        rewards,
        exo_dist: ProbVec::new(q).unwrap().into(),
        observations: None,
    })
    .unwrap()
}
