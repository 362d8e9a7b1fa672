use crate::math::{exp, sqrt};
use crate::StateVec;

/// Gaussian-kernel count-based exploration bonus.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CbeConfig {
    pub bandwidth: f64,
    pub coefficient: f64,
}

impl CbeConfig {
    /// `k(x, y) = exp(-|x - y|^2 / (2 h^2))`
    pub fn kernel(&self, x: &StateVec, y: &StateVec) -> f64 {
        exp(-x.distance_sq(y) / (2.0 * self.bandwidth * self.bandwidth))
    }
}

impl Default for CbeConfig {
    fn default() -> Self {
        CbeConfig {
            bandwidth: 0.5,
            coefficient: 20.0,
        }
    }
}

/// `sqrt(1 / sum_i k(s_i, s))` over the states in the tree.
pub fn cbe_reward<'a, I>(tree_states: I, s: &StateVec, cfg: &CbeConfig) -> f64
where
    I: IntoIterator<Item = &'a StateVec>,
{
    let total: f64 = tree_states.into_iter().map(|t| cfg.kernel(t, s)).sum();
    sqrt(1.0 / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_and_duplicate() {
        let cfg = CbeConfig::default();
        let s = StateVec::new(&[0.3, 0.7]);
        assert_eq!(cbe_reward([&s], &s, &cfg), 1.0);
        assert!((cbe_reward([&s, &s], &s, &cfg) - 1.0 / libm::sqrt(2.0)).abs() < 1e-15);
        let far = StateVec::new(&[10.0, 10.0]);
        assert!(cbe_reward([&far], &s, &cfg) > 1.0);
    }

    #[test]
    fn kernel_symmetry() {
        let cfg = CbeConfig {
            bandwidth: 0.3,
            coefficient: 1.0,
        };
        let a = StateVec::new(&[0.1, 0.2]);
        let b = StateVec::new(&[0.4, -0.2]);
        assert_eq!(cfg.kernel(&a, &b), cfg.kernel(&b, &a));
        assert_eq!(cfg.kernel(&a, &a), 1.0);
    }
}
