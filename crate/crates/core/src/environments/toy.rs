//! A one-state Exo-MDP with a ladder of shrinking action gaps.
//!
//! The last action pays 1/2 under every symbol. Action `i` below it pays
//! `1/2 + u_i[j]`, where `u_i` is a sign pattern scaled by `0.15` and shifted
//! so that its mean under the true law is exactly `-D_i`, with
//! `D_i = 0.1 * 0.75^i`. Under a misestimated law some of these actions
//! look better than the safe action, and the closer the gap, the longer it takes to
//! rule them out.

use crate::error::Result;
use crate::model::{ExoMdpSpec, ProbVec, SpecTables};

pub const LADDER_SYMBOLS: usize = 4;
pub const LADDER_HORIZON: usize = 5;
pub const LADDER_RUNGS: usize = 20;
pub const LADDER_LAW: [f64; LADDER_SYMBOLS] = [0.4, 0.3, 0.2, 0.1];

/// Index of the zero-gap action.
pub const LADDER_SAFE_ACTION: usize = LADDER_RUNGS;

/// Gap of action `i`.
pub fn ladder_gap(i: usize) -> f64 {
    if i >= LADDER_SAFE_ACTION {
        0.0
    } else {
        0.1 * 0.75f64.powi(i as i32)
    }
}

pub fn make_gap_ladder() -> Result<ExoMdpSpec> {
    let p = LADDER_LAW;
    // Non-constant sign patterns of length 4, +1 before -1 in each slot.
    let patterns: Vec<[f64; 4]> = (0..16usize)
        .map(|k| {
            let mut z = [0.0; 4];
            for (i, zi) in z.iter_mut().enumerate() {
                *zi = if (k >> (3 - i)) & 1 == 0 { 1.0 } else { -1.0 };
            }
            z
        })
        .filter(|z| z.iter().any(|&x| x != z[0]))
        .collect();
    let n_actions = LADDER_RUNGS + 1;
    let mut rewards = Vec::with_capacity(n_actions * LADDER_SYMBOLS);
    for i in 0..LADDER_RUNGS {
        let z = patterns[i % patterns.len()];
        let mean: f64 = z.iter().zip(&p).map(|(a, b)| 0.15 * a * b).sum();
        rewards.extend(z.iter().map(|zj| 0.5 + 0.15 * zj - mean - ladder_gap(i)));
    }
    rewards.extend([0.5; LADDER_SYMBOLS]);
    ExoMdpSpec::from_tables(SpecTables {
        n_states: 1,
        n_actions,
        n_exo: LADDER_SYMBOLS,
        horizon: LADDER_HORIZON,
        start_state: 0,
        transitions: vec![0; n_actions * LADDER_SYMBOLS],
        rewards,
        exo_dist: ProbVec::new(p.to_vec())?.into(),
        observations: None,
    })
}
