//! Seeded, splittable random streams.
//!
//! Every random source in an experiment is a ChaCha8 generator keyed by the
//! run seed, with the 64-bit stream id encoding what the stream is used for
//! and which episode it belongs to. Two streams never overlap, and a given
//! (seed, purpose, index) always yields the same sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ExoRng = ChaCha8Rng;

/// What a stream is used for; occupies the top byte of the stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    /// Exogenous draws of the environment.
    Environment = 1,
    /// Internal randomisation of a learner (random actions, policy mixtures).
    Learner = 2,
    /// Anything else (test fixtures, Monte Carlo estimates).
    Auxiliary = 3,
}

/// Generator for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ExoRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 56) | (index & ((1 << 56) - 1)));
    rng
}
