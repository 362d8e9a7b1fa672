use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::math::ln;
use crate::{ActionVec, StateVec};

/// Random number generator used by every planner.
pub type PlannerRng = ChaCha8Rng;

/// Value and policy models consulted during search.
pub trait Models: Sync {
    /// Estimated value-to-go of `state`, including its own reward.
    fn value(&self, state: &StateVec) -> f64;

    /// Draws an action in `[-1, 1]^d`.
    fn sample_action(&self, state: &StateVec, rng: &mut PlannerRng) -> ActionVec;

    /// Log-density of `action` under the policy at `state`.
    fn log_density(&self, state: &StateVec, action: &ActionVec) -> f64;
}

/// Uniform policy over the action box and a zero value function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UntrainedModels {
    pub action_dim: usize,
}

impl UntrainedModels {
    pub fn new(action_dim: usize) -> Self {
        UntrainedModels { action_dim }
    }
}

impl Models for UntrainedModels {
    fn value(&self, _state: &StateVec) -> f64 {
        0.0
    }

    fn sample_action(&self, _state: &StateVec, rng: &mut PlannerRng) -> ActionVec {
        let mut a = ActionVec::zeros(self.action_dim);
        for x in a.iter_mut() {
            *x = rng.random_range(-1.0..=1.0);
        }
        a
    }

    fn log_density(&self, _state: &StateVec, _action: &ActionVec) -> f64 {
        -(self.action_dim as f64) * ln(2.0)
    }
}
