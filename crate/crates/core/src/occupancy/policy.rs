use alloc::vec::Vec;

use super::alpha::{solve_alpha, MoveScore, NormalizationResult};
use crate::Result;

/// A tree move: expand the current node, or descend into one of its children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Stay,
    Child(usize),
}

/// Probabilities over a node's moves, in the order the scores were given.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeMoveDistribution {
    pub moves: Vec<Move>,
    pub probs: Vec<f64>,
    pub normalization: NormalizationResult,
}

impl TreeMoveDistribution {
    pub fn prob(&self, m: Move) -> Option<f64> {
        self.moves
            .iter()
            .position(|&x| x == m)
            .map(|i| self.probs[i])
    }

    /// Inverse-CDF sampling for `u` in `[0, 1)`; ties resolve to the earliest move.
    pub fn sample_index(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // u landed in the rounding slack above the final partial sum
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    pub fn sample(&self, u: f64) -> (Move, f64) {
        let i = self.sample_index(u);
        (self.moves[i], self.probs[i])
    }
}

fn distribution(scores: &[MoveScore], lambda: f64) -> Result<TreeMoveDistribution> {
    let norm = solve_alpha(scores, lambda)?;
    let x_max = scores
        .iter()
        .map(|s| s.value_term())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = scores
        .iter()
        .map(|s| lambda * s.volume / (norm.gap + (x_max - s.value_term())))
        .collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok(TreeMoveDistribution {
        moves: scores.iter().map(|s| s.id).collect(),
        probs,
        normalization: norm,
    })
}

/// `pi(m) = lambda * vol_m / (alpha - w_m q_m)` with `alpha` from [`solve_alpha`].
pub fn tree_policy(scores: &[MoveScore], lambda: f64) -> Result<TreeMoveDistribution> {
    distribution(scores, lambda)
}

/// Tree policy when the policy itself is also regularized towards uniform over
/// tree moves: every move's volume is offset by `w / (1 + n_children)`.
pub fn tree_policy_action_reward_variant(
    scores: &[MoveScore],
    lambda: f64,
    n_children: usize,
) -> Result<TreeMoveDistribution> {
    let shifted: Vec<MoveScore> = scores
        .iter()
        .map(|s| MoveScore {
            volume: s.volume + s.weight / (1 + n_children) as f64,
            ..*s
        })
        .collect();
    distribution(&shifted, lambda)
}

/// Optimal expansion distribution over nodes given `(value, volume)` pairs:
/// `d(n) = lambda * Vol(n) / (alpha - V(n))`.
pub fn direct_occupancy(nodes: &[(f64, f64)], lambda: f64) -> Result<Vec<f64>> {
    let scores: Vec<MoveScore> = nodes
        .iter()
        .enumerate()
        .map(|(i, &(v, vol))| MoveScore::new(Move::Child(i), v, vol, 1.0))
        .collect();
    Ok(distribution(&scores, lambda)?.probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn stay(q: f64, v: f64) -> MoveScore {
        MoveScore::new(Move::Stay, q, v, 1.0)
    }

    fn child(i: usize, q: f64, v: f64) -> MoveScore {
        MoveScore::new(Move::Child(i), q, v, 1.0)
    }

    #[test]
    fn only_stay() {
        let d = tree_policy(&[stay(3.0, 0.2)], 0.7).unwrap();
        assert_eq!(d.probs, vec![1.0]);
        assert_eq!(d.sample(0.999).0, Move::Stay);
    }

    #[test]
    fn symmetric_children() {
        let d = tree_policy(
            &[stay(0.0, 0.2), child(0, 1.0, 0.4), child(1, 1.0, 0.4)],
            0.5,
        )
        .unwrap();
        assert!((d.probs[1] - d.probs[2]).abs() < 1e-15);
    }

    #[test]
    fn quadratic_probabilities() {
        let d = tree_policy(&[stay(0.0, 0.5), child(0, 10.0, 0.5)], 1.0).unwrap();
        let a = (11.0 + libm::sqrt(101.0)) / 2.0;
        assert!((d.probs[0] - 0.5 / a).abs() < 1e-10);
        assert!((d.probs[1] - 0.5 / (a - 10.0)).abs() < 1e-10);
        assert!((d.probs[0] - 0.0475).abs() < 1e-4);
    }

    #[test]
    fn large_lambda_is_volume_proportional() {
        let d = direct_occupancy(&[(0.0, 1.0), (0.0, 3.0)], 1e3).unwrap();
        assert!((d[0] - 0.25).abs() < 1e-12 && (d[1] - 0.75).abs() < 1e-12);
        assert_eq!(direct_occupancy(&[(5.0, 2.0)], 0.1).unwrap(), vec![1.0]);
    }

    #[test]
    fn variant_with_zero_weight_matches_plain_policy() {
        let mk = |w: f64| {
            vec![
                MoveScore::new(Move::Stay, 1.0, 0.3, w),
                MoveScore::new(Move::Child(0), 4.0, 0.2, w),
                MoveScore::new(Move::Child(1), 2.0, 0.5, w),
            ]
        };
        let plain = tree_policy(&mk(1e-300), 0.4).unwrap();
        let variant = tree_policy_action_reward_variant(&mk(1e-300), 0.4, 2).unwrap();
        for (a, b) in plain.probs.iter().zip(&variant.probs) {
            assert!((a - b).abs() < 1e-12);
        }
        let single =
            tree_policy_action_reward_variant(&[MoveScore::new(Move::Stay, 1.0, 0.3, 0.5)], 0.4, 0)
                .unwrap();
        assert_eq!(single.probs, vec![1.0]);
    }

    #[test]
    fn sampling_edges() {
        let d = tree_policy(&[stay(0.0, 0.5), child(0, 0.0, 0.5)], 1.0).unwrap();
        assert_eq!(d.sample_index(0.0), 0);
        assert_eq!(d.sample_index(0.4999), 0);
        assert_eq!(d.sample_index(0.5), 1);
        assert_eq!(d.sample_index(1.0), 1);
    }
}
