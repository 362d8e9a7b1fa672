//! Occupancy-regularized expansion distributions.
//!
//! Maximizing expected node value minus `lambda` times the reverse-KL
//! divergence between a partition density estimate of the expansion
//! distribution and the uniform measure has the closed-form optimizer
//! `d(n) = lambda * Vol(n) / (alpha - V(n))`. The same form, applied to the
//! moves available at a single search node, gives the per-node tree policy.
//! Everything here is a pure function of its inputs.

mod alpha;
mod cbe;
mod policy;
mod puct;

pub use alpha::{
    solve_alpha, MoveScore, NormalizationResult, MAX_SOLVER_ITERATIONS, RESIDUAL_TOLERANCE,
};
pub use cbe::{cbe_reward, CbeConfig};
pub use policy::{
    direct_occupancy, tree_policy, tree_policy_action_reward_variant, Move, TreeMoveDistribution,
};
pub use puct::puct_score;

use crate::math::sqrt;

/// `lambda(N) = c / sqrt(N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegularizationSchedule {
    pub c: f64,
    pub gamma: f64,
}

impl RegularizationSchedule {
    /// `c = 1 / (1 - gamma)`, which makes `c (1 - gamma) = 1`.
    pub fn for_discount(gamma: f64) -> Self {
        RegularizationSchedule {
            c: 1.0 / (1.0 - gamma),
            gamma,
        }
    }

    pub fn lambda_of(&self, n: u64) -> f64 {
        self.c / sqrt(n.max(1) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_is_decreasing() {
        let s = RegularizationSchedule::for_discount(0.95);
        assert!((s.c - 20.0).abs() < 1e-12);
        assert!((s.lambda_of(1) - s.c).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for n in 1..1000 {
            let l = s.lambda_of(n);
            assert!(l < prev);
            prev = l;
        }
        assert!((s.lambda_of(100) - 2.0).abs() < 1e-12);
    }
}
