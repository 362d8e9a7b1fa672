//! Search algorithms.
//!
//! [`VolumeSearch`] grows an open-loop tree whose expansion distribution
//! follows the occupancy-regularized tree policy, backed by a k-d tree for
//! volumes and value estimates. [`AlphaZeroSearch`] is continuous AlphaZero
//! with progressive widening, optionally with a count-based exploration
//! bonus. [`run_episode`] runs one full episode for any [`Algorithm`].

mod alphazero;
mod models;
mod plan;
mod tree;
mod volume;

use alloc::string::String;
use alloc::vec::Vec;

pub use alphazero::{AlphaZeroSearch, AzVariant};
pub use models::{Models, PlannerRng, UntrainedModels};
pub use plan::{openloop_select_plan, replay_plan};
pub use tree::{earned_return, AuditFailure, NodeId, SearchNode, SearchTree};
pub use volume::{Descent, DescentContext, VolumeSearch};

use crate::env::Environment;
use crate::occupancy::CbeConfig;
use crate::spatial::SplitRule;
use crate::{ActionVec, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Algorithm {
    VolumeMcts,
    Alphazero,
    AlphazeroCbe,
    AlphazeroOpenloop,
    VolumeRrtAblation,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::VolumeMcts,
        Algorithm::Alphazero,
        Algorithm::AlphazeroCbe,
        Algorithm::AlphazeroOpenloop,
        Algorithm::VolumeRrtAblation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::VolumeMcts => "volume-mcts",
            Algorithm::Alphazero => "alphazero",
            Algorithm::AlphazeroCbe => "alphazero-cbe",
            Algorithm::AlphazeroOpenloop => "alphazero-openloop",
            Algorithm::VolumeRrtAblation => "volume-rrt-ablation",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }

    pub fn is_open_loop(self) -> bool {
        matches!(
            self,
            Algorithm::VolumeMcts | Algorithm::AlphazeroOpenloop | Algorithm::VolumeRrtAblation
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct PlannerConfig {
    pub algorithm: Algorithm,
    pub gamma: f64,
    /// Regularization scale: `lambda = c / sqrt(N)`; also the PUCT constant.
    pub c: f64,
    /// Total rollouts per episode, split evenly across steps for closed-loop search.
    pub rollouts: usize,
    pub pw_coeff: f64,
    pub pw_exponent: f64,
    pub seed: u64,
    pub value_floor_enabled: bool,
    pub horizon: usize,
    pub cbe: CbeConfig,
    /// Offset each child's volume by `weight / (1 + children)`.
    pub action_reward_variant: bool,
    /// Keep the chosen child's subtree between closed-loop steps.
    pub reuse_subtree: bool,
    /// Leave states that coincide with an existing k-d point out of the k-d
    /// tree; such nodes get zero volume and are never expanded.
    pub merge_duplicate_states: bool,
    /// Extra action samples drawn when a sampled action leaves the state unchanged.
    pub blocked_action_retries: u32,
    pub kd_split: SplitRule,
    /// The zero-reward ablation ends its search at the first goal node, like
    /// a feasibility planner.
    pub ablation_stops_at_goal: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            algorithm: Algorithm::VolumeMcts,
            gamma: 0.95,
            c: 20.0,
            rollouts: 5000,
            pw_coeff: 1.0,
            pw_exponent: 0.5,
            seed: 0,
            value_floor_enabled: true,
            horizon: 50,
            cbe: CbeConfig::default(),
            action_reward_variant: false,
            reuse_subtree: true,
            merge_duplicate_states: true,
            blocked_action_retries: 0,
            kd_split: SplitRule::LargestSeparation,
            ablation_stops_at_goal: true,
        }
    }
}

impl PlannerConfig {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        PlannerConfig {
            algorithm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidArgument("gamma must lie in (0, 1)"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument("c must be positive"));
        }
        if !(self.pw_exponent > 0.0 && self.pw_exponent <= 1.0) {
            return Err(Error::InvalidArgument("pw_exponent must lie in (0, 1]"));
        }
        if !(self.pw_coeff > 0.0) {
            return Err(Error::InvalidArgument("pw_coeff must be positive"));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1"));
        }
        if !(self.cbe.bandwidth > 0.0 && self.cbe.coefficient > 0.0) {
            return Err(Error::InvalidArgument(
                "cbe bandwidth and coefficient must be positive",
            ));
        }
        Ok(())
    }

    /// Value lower bound `R(s) / (1 - gamma)` when enabled.
    pub fn floor(&self, reward: f64) -> f64 {
        if self.value_floor_enabled {
            reward / (1.0 - self.gamma)
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Outcome of one episode.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunRecord {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub env: String,
    pub size: usize,
    pub rollouts: usize,
    pub undiscounted_return: f64,
    pub success: bool,
    /// Search iterations consumed before the goal was first reached.
    pub expansions_to_goal: Option<u64>,
    /// Filled in by callers that can read a clock.
    pub ms: u64,
    pub value_floor_enabled: bool,
}

/// Everything produced by [`run_episode`].
#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub record: RunRecord,
    /// The executed actions.
    pub actions: Vec<ActionVec>,
    /// The open-loop search tree, or the final closed-loop tree.
    pub tree: SearchTree,
    /// Value estimate of every node of `tree`, indexed by [`NodeId`].
    pub node_values: Vec<f64>,
}

/// Runs one episode of `cfg.algorithm` on `env`.
pub fn run_episode(
    env: &dyn Environment,
    models: &dyn Models,
    cfg: &PlannerConfig,
) -> Result<EpisodeResult> {
    cfg.validate()?;
    match cfg.algorithm {
        Algorithm::VolumeMcts | Algorithm::VolumeRrtAblation => {
            volume::run_open_loop(env, models, cfg)
        }
        Algorithm::AlphazeroOpenloop => alphazero::run_open_loop(env, models, cfg),
        Algorithm::Alphazero | Algorithm::AlphazeroCbe => {
            alphazero::run_closed_loop(env, models, cfg)
        }
    }
}

fn record(
    env: &dyn Environment,
    cfg: &PlannerConfig,
    ret: f64,
    expansions_to_goal: Option<u64>,
) -> RunRecord {
    RunRecord {
        seed: cfg.seed,
        algorithm: cfg.algorithm,
        env: String::from(env.name()),
        size: env.size(),
        rollouts: cfg.rollouts,
        undiscounted_return: ret,
        success: expansions_to_goal.is_some(),
        expansions_to_goal,
        ms: 0,
        value_floor_enabled: cfg.value_floor_enabled,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::from_name(a.name()), Some(a));
        }
        assert_eq!(Algorithm::from_name("mcts"), None);
    }

    #[test]
    fn config_validation() {
        assert!(PlannerConfig::default().validate().is_ok());
        let bad = PlannerConfig {
            pw_exponent: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = PlannerConfig {
            gamma: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
