//! Exo-MDPs: MDPs whose only randomness is an exogenous input drawn
//! independently of the agent's actions.
//!
//! The crate provides the tabular model and exact dynamic programming
//! ([`model`], [`dp`]), the linear-mixture representation with rank reduction
//! ([`linear_mixture`]), concrete environments, online learners and an
//! experiment harness with exact regret accounting.

pub mod algorithms;
pub mod dp;
pub mod environments;
pub mod error;
pub mod exec;
pub mod harness;
pub mod linear_mixture;
pub mod model;
pub mod policy;
pub mod rng;
pub mod rollout;

pub use dp::{dp_solve, dp_solve_with, policy_value, policy_values, simulation_gap_bound, ValueTable};
pub use error::{Error, Result};
pub use exec::Exec;
pub use model::{sample_exogenous, ExoDist, ExoMdpSpec, ProbVec, SpecTables};
pub use policy::{uniform_mixture_policy, DeterministicPolicy, MarkovPolicy, Policy};
pub use rng::{stream, ExoRng, Purpose};
pub use rollout::{rollout_episode, ObservationMode, Trajectory, Transition};
