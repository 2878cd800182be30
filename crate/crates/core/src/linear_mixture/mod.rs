//! Linear-mixture view of an Exo-MDP: features, the stacked information
//! matrix with its effective rank, lossless rank reduction, and the lifting
//! of an arbitrary tabular MDP into an Exo-MDP.

mod features;
mod info;
mod lift;

pub use features::{build_features, verify_features, verify_linear_representation, FeatureSet};
pub use info::{build_info_matrix, numerical_rank, rank_reduce, InfoMatrix, RankReduction, RANK_RTOL};
pub use lift::{lift_discrete_mdp, Lifted, TabularMdp, DEFAULT_LIFT_CAP};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::dp_solve;
    use crate::model::{ExoMdpSpec, ProbVec, SpecTables};
    use crate::rng::{stream, Purpose};
    use rand::Rng;

    fn random_spec(rng: &mut impl Rng, n_s: usize, n_a: usize, d: usize) -> ExoMdpSpec {
        let cells = n_s * n_a * d;
        let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
        ExoMdpSpec::from_tables(SpecTables {
            n_states: n_s,
            n_actions: n_a,
            n_exo: d,
            horizon: 3,
            start_state: 0,
            transitions: (0..cells).map(|_| rng.random_range(0..n_s)).collect(),
            rewards: (0..cells).map(|_| rng.random()).collect(),
            exo_dist: ProbVec::from_weights(&w).unwrap().into(),
            observations: None,
        })
        .unwrap()
    }

    fn random_prob(rng: &mut impl Rng, d: usize) -> ProbVec {
        let w: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        ProbVec::from_weights(&w).unwrap()
    }

    #[test]
    fn kernel_matches_summation_oracle() {
        let mut rng = stream(1, Purpose::Auxiliary, 0);
        for _ in 0..50 {
            let spec = random_spec(&mut rng, 4, 3, 5);
            let p = random_prob(&mut rng, 5);
            let f = build_features(&spec);
            let mut worst: f64 = 0.0;
            for s in 0..4 {
                for a in 0..3 {
                    for sn in 0..4 {
                        // Oracle: sum p[j] over symbols that land on sn.
                        let mut brute = 0.0;
                        for j in 0..5 {
                            if spec.next_state(s, a, j) == sn {
                                brute += p[j];
                            }
                        }
                        let lin: f64 = f.phi_p(s, a, sn).iter().zip(p.as_slice()).map(|(x, y)| x * y).sum();
                        worst = worst.max((lin - brute).abs());
                    }
                }
            }
            assert_eq!(worst, 0.0);
        }
    }

    #[test]
    fn symbol_independent_dynamics_have_constant_rows_and_rank_one() {
        let spec = ExoMdpSpec::from_tables(SpecTables {
            n_states: 3,
            n_actions: 2,
            n_exo: 4,
            horizon: 2,
            start_state: 0,
            transitions: (0..24).map(|i| (i / 4 + 1) % 3).collect(),
            rewards: vec![0.5; 24],
            exo_dist: ProbVec::uniform(4).into(),
            observations: None,
        })
        .unwrap();
        let f = build_features(&spec);
        for s in 0..3 {
            for a in 0..2 {
                for sn in 0..3 {
                    let row = f.phi_p(s, a, sn);
                    assert!(row.iter().all(|&x| x == row[0]));
                }
            }
        }
        let info = build_info_matrix(&f);
        assert_eq!(info.rank(), 1);
        let red = rank_reduce(&info);
        assert_eq!(red.dim(), 1);
        assert_eq!(red.reduced_phi(&f, 0, 0, 1).len(), 1);
    }

    #[test]
    fn block_columns_sum_to_one() {
        let mut rng = stream(2, Purpose::Auxiliary, 0);
        let spec = random_spec(&mut rng, 4, 2, 6);
        let f = build_features(&spec);
        for s in 0..4 {
            for a in 0..2 {
                let mut col = [0.0; 6];
                for sn in 0..4 {
                    col.iter_mut().zip(f.phi_p(s, a, sn)).for_each(|(c, x)| *c += x);
                }
                assert!(col.iter().all(|&c| c == 1.0));
            }
        }
    }

    #[test]
    fn verify_is_exact_and_detects_corruption() {
        let mut rng = stream(3, Purpose::Auxiliary, 0);
        let spec = random_spec(&mut rng, 3, 2, 4);
        let p = random_prob(&mut rng, 4);
        assert!(verify_linear_representation(&spec, &p) <= 1e-12);
        let mut f = build_features(&spec);
        let old = spec.next_state(1, 1, 2);
        f.reassign(1, 1, 2, (old + 1) % 3);
        assert!(verify_features(&f, &spec, &p) >= p.min_positive());
    }

    #[test]
    fn full_rank_reduction_is_change_of_basis() {
        // Identity-like: symbol j sends every (s, a) to state j.
        let spec = ExoMdpSpec::from_tables(SpecTables {
            n_states: 4,
            n_actions: 1,
            n_exo: 4,
            horizon: 2,
            start_state: 0,
            transitions: (0..16).map(|i| i % 4).collect(),
            rewards: vec![0.0; 16],
            exo_dist: ProbVec::uniform(4).into(),
            observations: None,
        })
        .unwrap();
        let f = build_features(&spec);
        let info = build_info_matrix(&f);
        assert_eq!(info.rank(), 4);
        let red = rank_reduce(&info);
        let mut rng = stream(4, Purpose::Auxiliary, 0);
        let p = random_prob(&mut rng, 4);
        let theta = red.reduced_parameter(&p);
        for s in 0..4 {
            for sn in 0..4 {
                let v = red.reduced_phi(&f, s, 0, sn).dot(&theta);
                assert!((v - f.transition_prob(s, 0, sn, &p)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rank_one_block_of_ones() {
        let m = nalgebra::DMatrix::from_element(4, 6, 1.0);
        let (sv, v) = super::info::right_svd(&m);
        assert!((sv[0] - 24f64.sqrt()).abs() < 1e-12);
        assert!(sv[1..].iter().all(|&x| x < 1e-12));
        let u = v.column(0);
        assert!(u.iter().all(|x| (x.abs() - 6f64.sqrt().recip()).abs() < 1e-12));
    }

    #[test]
    fn deleting_rows_never_increases_rank() {
        let mut rng = stream(5, Purpose::Auxiliary, 0);
        let spec = random_spec(&mut rng, 3, 2, 6);
        let info = build_info_matrix(&build_features(&spec));
        let m = info.matrix();
        for keep in 1..m.nrows() {
            let sub = m.rows(0, keep).into_owned();
            let (sv, _) = super::info::right_svd(&sub);
            assert!(numerical_rank(&sv, info.total_rows(), m.ncols()) <= info.rank());
        }
    }

    #[test]
    fn reward_covering_extends_basis_only_when_needed() {
        // One state: F is all ones, rewards vary with the symbol.
        let spec = ExoMdpSpec::from_tables(SpecTables {
            n_states: 1,
            n_actions: 2,
            n_exo: 3,
            horizon: 2,
            start_state: 0,
            transitions: vec![0; 6],
            rewards: vec![0.1, 0.5, 0.9, 0.3, 0.3, 0.8],
            exo_dist: ProbVec::uniform(3).into(),
            observations: None,
        })
        .unwrap();
        let f = build_features(&spec);
        let red = rank_reduce(&build_info_matrix(&f));
        assert_eq!(red.dim(), 1);
        let cover = red.covering_rewards(&f);
        assert_eq!(cover.dim(), 3);
        let p = ProbVec::new(vec![0.2, 0.3, 0.5]).unwrap();
        let theta = cover.reduced_parameter(&p);
        let mut phi = vec![0.0; cover.dim()];
        for a in 0..2 {
            cover.project(f.phi_r(0, a), &mut phi);
            let v: f64 = phi.iter().zip(theta.iter()).map(|(x, y)| x * y).sum();
            assert!((v - f.mean_reward(0, a, &p)).abs() < 1e-9);
        }
        // Rewards constant across symbols already lie in the span.
        let flat = ExoMdpSpec::from_tables(SpecTables {
            rewards: vec![0.4; 6],
            ..SpecTables {
                n_states: 1,
                n_actions: 2,
                n_exo: 3,
                horizon: 2,
                start_state: 0,
                transitions: vec![0; 6],
                rewards: vec![],
                exo_dist: ProbVec::uniform(3).into(),
                observations: None,
            }
        })
        .unwrap();
        let ff = build_features(&flat);
        assert_eq!(rank_reduce(&build_info_matrix(&ff)).covering_rewards(&ff).dim(), 1);
    }

    fn two_state_mdp(t: [[f64; 2]; 2]) -> TabularMdp {
        TabularMdp {
            n_states: 2,
            n_actions: 1,
            horizon: 4,
            start_state: 0,
            transition: t.iter().flatten().copied().collect(),
            reward_support: vec![0.0, 1.0],
            reward_probs: vec![1.0, 0.0, 0.0, 1.0],
        }
    }

    #[test]
    fn lift_reproduces_kernel_by_enumeration() {
        let mdp = two_state_mdp([[0.3, 0.7], [0.6, 0.4]]);
        let lifted = lift_discrete_mdp(&mdp, DEFAULT_LIFT_CAP).unwrap();
        let spec = &lifted.spec;
        let p = spec.exo_dist().at(0);
        for s in 0..2 {
            // Enumerate the alphabet directly.
            let mut induced = [0.0; 2];
            for j in 0..spec.n_exo() {
                induced[spec.next_state(s, 0, j)] += p[j];
            }
            let tv: f64 = induced.iter().zip(mdp.kernel(s, 0)).map(|(a, b)| (a - b).abs()).sum();
            assert!(tv <= 1e-12);
        }
        let (_, v) = dp_solve(spec, spec.exo_dist());
        assert!((v.get(0, 0) - mdp.optimal_value()).abs() < 1e-9);
    }

    #[test]
    fn deterministic_lift_collapses_to_one_symbol() {
        let mdp = two_state_mdp([[0.0, 1.0], [1.0, 0.0]]);
        let lifted = lift_discrete_mdp(&mdp, DEFAULT_LIFT_CAP).unwrap();
        assert_eq!(lifted.spec.n_exo(), 1);
        assert_eq!(lifted.spec.exo_dist().at(0).as_slice(), &[1.0]);
        assert_eq!(lifted.full_alphabet, 2u128.pow(2) * 2u128.pow(2));
    }

    #[test]
    fn unpruned_alphabet_size_of_binary_reward_mdp() {
        let mdp = TabularMdp {
            n_states: 2,
            n_actions: 2,
            horizon: 2,
            start_state: 0,
            transition: vec![0.5; 8],
            reward_support: vec![0.0, 1.0],
            reward_probs: vec![0.5; 8],
        };
        let lifted = lift_discrete_mdp(&mdp, DEFAULT_LIFT_CAP).unwrap();
        assert_eq!(lifted.full_alphabet, 256);
        assert_eq!(lifted.spec.n_exo(), 256);
    }

    #[test]
    fn lift_cap_error_names_size() {
        let mdp = TabularMdp {
            n_states: 2,
            n_actions: 2,
            horizon: 2,
            start_state: 0,
            transition: vec![0.5; 8],
            reward_support: vec![0.0, 1.0],
            reward_probs: vec![0.5; 8],
        };
        match lift_discrete_mdp(&mdp, 100) {
            Err(crate::Error::Capacity { required, cap, .. }) => {
                assert_eq!(required, 256);
                assert_eq!(cap, 100);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }
}
