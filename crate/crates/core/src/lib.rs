//! Volume-regularized Monte Carlo tree search.
//!
//! The crate is `no_std` and only needs `alloc`. It contains everything that
//! is pure computation:
//!
//! - [`env`]: deterministic continuous maze environments (geometric and
//!   Dubins-car dynamics) and seeded maze generation.
//! - [`spatial`]: the incremental k-d tree used as a partition density
//!   estimator, with region volumes and nonparametric value estimates.
//! - [`occupancy`]: the closed-form occupancy-regularized expansion
//!   distribution, its normalization constant, and the count-based
//!   exploration and PUCT scores used by the baselines.
//! - [`planner`]: Volume-MCTS, AlphaZero-Continuous (closed and open loop,
//!   optionally with count-based exploration) and the zero-reward ablation.
//! - [`learn`]: small MLP value/policy networks with hand-written backprop.
//!
//! File formats, the CLI and parallel experiment execution live in the
//! companion `vmcts` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod env;
pub mod learn;
pub mod occupancy;
pub mod planner;
pub mod spatial;

mod error;
mod math;
mod vector;

pub use error::{Error, Result};
pub use vector::{ActionVec, StateVec, MAX_DIM};
