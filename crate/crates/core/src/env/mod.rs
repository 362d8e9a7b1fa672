//! Deterministic continuous-state benchmark environments.

mod corridor;
mod dubins;
mod episode;
mod geometry;
mod maze;

pub use corridor::Corridor;
pub use dubins::{DubinsMaze, DUBINS_MAX_STEERING, DUBINS_SUBSTEPS};
pub use episode::{rollout_episode, EpisodeSummary};
pub use geometry::segments_intersect;
pub use maze::{
    generate_maze, GeometricMaze, MazeSpec, Tile, Wall, WallGrid, LOOP_OPENING_PROBABILITY,
};

use crate::{ActionVec, StateVec};

/// Axis-aligned box `low <= x <= high`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoxBounds {
    pub low: StateVec,
    pub high: StateVec,
}

impl BoxBounds {
    pub fn new(low: &[f64], high: &[f64]) -> Self {
        assert_eq!(low.len(), high.len());
        assert!(low.iter().zip(high).all(|(l, h)| l < h), "degenerate box");
        BoxBounds {
            low: StateVec::new(low),
            high: StateVec::new(high),
        }
    }

    pub fn dim(&self) -> usize {
        self.low.dim()
    }

    pub fn side(&self, d: usize) -> f64 {
        self.high[d] - self.low[d]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|d| self.side(d)).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .enumerate()
                .all(|(d, x)| *x >= self.low[d] && *x <= self.high[d])
    }
}

/// Result of one environment transition.
///
/// `steps_remaining_bonus` is filled in by the episode runner: the step
/// function has no notion of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next_state: StateVec,
    pub reward: f64,
    pub terminal: bool,
    pub steps_remaining_bonus: f64,
}

/// Deterministic MDP with a bounded continuous state space and actions in `[-1, 1]^d`.
///
/// Rewards are state rewards: 1 inside the goal region and 0 elsewhere.
pub trait Environment: Sync {
    fn name(&self) -> &'static str;
    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn bounds(&self) -> &BoxBounds;
    fn start_state(&self) -> StateVec;
    fn reward(&self, state: &StateVec) -> f64;
    fn step(&self, state: &StateVec, action: &ActionVec) -> StepOutcome;

    fn is_goal(&self, state: &StateVec) -> bool {
        self.reward(state) >= 1.0
    }

    /// The action that leaves the state unchanged.
    fn stay_action(&self) -> ActionVec {
        ActionVec::zeros(self.action_dim())
    }

    /// Size parameter reported in run records (maze tiles per side).
    fn size(&self) -> usize {
        0
    }
}

pub(crate) fn outcome(env: &(impl Environment + ?Sized), next_state: StateVec) -> StepOutcome {
    let reward = env.reward(&next_state);
    StepOutcome {
        next_state,
        reward,
        terminal: reward >= 1.0,
        steps_remaining_bonus: 0.0,
    }
}
