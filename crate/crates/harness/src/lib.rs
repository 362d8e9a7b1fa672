//! Experiment harness for volume-regularized MCTS.
//!
//! Runs planner grids over maze environments in parallel and writes
//! `runs.csv` (one row per episode) and `table.json` (per-cell mean and
//! standard error). Also trains networks, checks the exploration bound on
//! a corridor, runs the invariant suite and exports search trees.

pub mod bound;
pub mod config;
pub mod error;
pub mod formats;
pub mod props;
pub mod records;
pub mod runner;
pub mod training;

pub use error::{HarnessError, Result};
