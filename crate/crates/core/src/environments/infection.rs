//! Two-state infection model with a vaccination action.
//!
//! State 0 is healthy and 1 infected. The exogenous symbol packs three
//! independent coins `(xi0, xi1, xi2)` as `4 xi0 + 2 xi1 + xi2`: a healthy
//! unvaccinated agent becomes infected iff `xi0 = 1`, a vaccinated one iff
//! `xi1 = 1`, and an infected agent stays infected iff `xi2 = 1`. The reward
//! is 1 per healthy stage.

use crate::error::{Error, Result};
use crate::model::{ExoMdpSpec, ProbVec, SpecTables};

pub const INFECTION_SYMBOLS: usize = 8;

/// `p0`: infection rate without vaccine, `p1`: with vaccine, `p2`: recovery rate.
pub fn make_infection(p0: f64, p1: f64, p2: f64, horizon: usize) -> Result<ExoMdpSpec> {
    for (name, p) in [("p0", p0), ("p1", p1), ("p2", p2)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("{name} = {p} is not a probability")));
        }
    }
    let coins = [p0, p1, 1.0 - p2];
    let mut probs = Vec::with_capacity(INFECTION_SYMBOLS);
    for j in 0..INFECTION_SYMBOLS {
        let mut q = 1.0;
        for (k, &c) in coins.iter().enumerate() {
            q *= if bit(j, k) == 1 { c } else { 1.0 - c };
        }
        probs.push(q);
    }
    let mut transitions = Vec::with_capacity(2 * 2 * INFECTION_SYMBOLS);
    let mut rewards = Vec::with_capacity(2 * 2 * INFECTION_SYMBOLS);
    for s in 0..2 {
        for a in 0..2 {
            let coin = match (s, a) {
                (0, 0) => 0,
                (0, _) => 1,
                _ => 2,
            };
            for j in 0..INFECTION_SYMBOLS {
                transitions.push(bit(j, coin));
                rewards.push(1.0 - s as f64);
            }
        }
    }
    ExoMdpSpec::from_tables(SpecTables {
        n_states: 2,
        n_actions: 2,
        n_exo: INFECTION_SYMBOLS,
        horizon,
        start_state: 0,
        transitions,
        rewards,
        exo_dist: ProbVec::from_weights(&probs)?.into(),
        observations: None,
    })
}

/// Coin `k` (0, 1 or 2) of symbol `j`.
fn bit(j: usize, k: usize) -> usize {
    (j >> (2 - k)) & 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{policy_value, dp_solve};
    use crate::linear_mixture::{build_features, build_info_matrix, rank_reduce, verify_linear_representation};
    use crate::policy::DeterministicPolicy;
    use crate::rng::{stream, Purpose};
    use rand::Rng;

    #[test]
    fn kernel_matches_displayed_matrices() {
        let mut rng = stream(0, Purpose::Auxiliary, 0);
        for _ in 0..100 {
            let (p0, p1, p2): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
            let spec = make_infection(p0, p1, p2, 3).unwrap();
            let p = spec.exo_dist().at(0);
            let expect = [[1.0 - p0, p0], [1.0 - p1, p1], [p2, 1.0 - p2], [p2, 1.0 - p2]];
            for (sa, row) in expect.iter().enumerate() {
                let k = spec.kernel(sa / 2, sa % 2, p);
                assert!((k[0] - row[0]).abs() < 1e-12 && (k[1] - row[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn first_coin_drives_unvaccinated_infection() {
        let spec = make_infection(0.3, 0.1, 0.5, 2).unwrap();
        for j in 4..8 {
            assert_eq!(spec.step(0, 0, j).unwrap().0, 1);
        }
    }

    #[test]
    fn information_matrix() {
        let spec = make_infection(0.5, 0.5, 0.5, 4).unwrap();
        let f = build_features(&spec);
        assert_eq!(f.phi_p(0, 0, 1), vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        let info = build_info_matrix(&f);
        assert_eq!(info.cols(), 8);
        assert_eq!(info.rank(), 4);
        assert!(verify_linear_representation(&spec, spec.exo_dist().at(0)) <= 1e-12);
        let red = rank_reduce(&info);
        let mut rng = stream(1, Purpose::Auxiliary, 0);
        for _ in 0..100 {
            let w: Vec<f64> = (0..8).map(|_| rng.random()).collect();
            let p = ProbVec::from_weights(&w).unwrap();
            let theta = red.reduced_parameter(&p);
            for s in 0..2 {
                for a in 0..2 {
                    for sn in 0..2 {
                        let v = red.reduced_phi(&f, s, a, sn).dot(&theta);
                        assert!((v - f.transition_prob(s, a, sn, &p)).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn vaccine_without_effect_makes_policies_equal() {
        let spec = make_infection(0.4, 0.4, 0.3, 5).unwrap();
        let (_, v) = dp_solve(&spec, spec.exo_dist());
        for a in 0..2 {
            let pi = DeterministicPolicy::constant(5, 2, a);
            let val = policy_value(&spec, spec.exo_dist(), &pi.into()).unwrap();
            assert!((val - v.get(0, 0)).abs() < 1e-12);
        }
    }
}
