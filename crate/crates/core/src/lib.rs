//! Simulation and numerical certification for capacitated MNL-bandit
//! assortment selection.
//!
//! The crate is organised bottom-up:
//!
//! - [`mnl`]: the exact multinomial-logit choice environment (choice
//!   probabilities, expected revenue, sampling, brute-force optimum).
//! - [`adversarial`]: the planted instance family where `K` elevated items
//!   carry preference `(1+ε)/K` and the rest `1/K`, the `ε` schedule, the
//!   single-stage regret gap and the `min{0.001·√(NT), T/54}` bound value.
//! - [`divergence`]: exact KL / total variation for categorical laws and
//!   auditors that recompute every inequality of the lower-bound argument
//!   with signed margins.
//! - [`policy`]: fixed and uniform-random baselines and an epoch-based UCB
//!   policy.
//! - [`runner`]: trajectories, Bayes regret over the uniform prior on
//!   elevated sets, scaling fits and report emission.

pub mod adversarial;
pub mod certify;
pub mod divergence;
mod error;
pub mod mnl;
pub mod policy;
pub mod runner;

pub use error::{Error, Result};
