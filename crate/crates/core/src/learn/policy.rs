use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mlp::Mlp;
use crate::math::{exp, ln};
use crate::{Error, Result};

pub const MIN_STDDEV: f64 = 1e-3;
pub const MAX_STDDEV: f64 = 2.0;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;

/// Diagonal Gaussian over actions. The backbone emits `d` means followed by
/// `d` log-stddevs.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    net: Mlp,
}

/// Mean and clamped log-stddev at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
}

impl Gaussian {
    pub fn unit(dim: usize) -> Self {
        Gaussian {
            mean: alloc::vec![0.0; dim],
            log_std: alloc::vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn log_density(&self, action: &[f64]) -> f64 {
        self.mean
            .iter()
            .zip(&self.log_std)
            .zip(action)
            .map(|((m, s), a)| {
                let z = (a - m) * exp(-s);
                -0.5 * z * z - s - HALF_LN_TWO_PI
            })
            .sum()
    }

    /// `KL(N(0, I) || self)` in closed form.
    pub fn kl_from_unit(&self) -> f64 {
        self.mean
            .iter()
            .zip(&self.log_std)
            .map(|(m, s)| s + (1.0 + m * m) * exp(-2.0 * s) / 2.0 - 0.5)
            .sum()
    }

    /// Draws a sample and clips it to `[-1, 1]`.
    pub fn sample_clipped<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.log_std)
            .map(|(m, s)| {
                let z: f64 = StandardNormal.sample(rng);
                (m + exp(*s) * z).clamp(-1.0, 1.0)
            })
            .collect()
    }
}

impl GaussianPolicy {
    pub fn new(net: Mlp) -> Result<Self> {
        if !net.output_dim().is_multiple_of(2) {
            return Err(Error::InvalidArgument(
                "policy network needs an even number of outputs",
            ));
        }
        Ok(GaussianPolicy { net })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Mlp {
        &mut self.net
    }

    pub fn into_net(self) -> Mlp {
        self.net
    }

    pub fn action_dim(&self) -> usize {
        self.net.output_dim() / 2
    }

    pub fn distribution(&self, state: &[f64]) -> Result<Gaussian> {
        Ok(split_head(&self.net.forward(state)?))
    }
}

pub(crate) fn split_head(out: &[f64]) -> Gaussian {
    let d = out.len() / 2;
    let (lo, hi) = (ln(MIN_STDDEV), ln(MAX_STDDEV));
    Gaussian {
        mean: out[..d].to_vec(),
        log_std: out[d..].iter().map(|s| s.clamp(lo, hi)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::PlannerRng;
    use rand::SeedableRng;

    #[test]
    fn unit_gaussian_log_density() {
        let g = Gaussian::unit(2);
        let expected = -(2.0 * core::f64::consts::PI).ln() - 0.5 * (0.25 + 0.09);
        assert!((g.log_density(&[0.5, -0.3]) - expected).abs() < 1e-14);
        assert_eq!(g.kl_from_unit(), 0.0);
    }

    #[test]
    fn kl_is_positive_away_from_prior() {
        for (m, s) in [(0.1, 0.0), (0.0, 0.3), (-1.0, -2.0), (2.0, 0.69)] {
            let g = Gaussian {
                mean: alloc::vec![m],
                log_std: alloc::vec![s],
            };
            assert!(g.kl_from_unit() > 0.0, "{m} {s}");
        }
    }

    #[test]
    fn stddev_is_clamped_and_density_stays_finite() {
        let g = split_head(&[0.0, 0.0, -50.0, 9.0]);
        assert_eq!(g.log_std[0], MIN_STDDEV.ln());
        assert_eq!(g.log_std[1], MAX_STDDEV.ln());
        for a in [[-1.0, -1.0], [1.0, 1.0], [0.0, 0.0]] {
            assert!(g.log_density(&a).is_finite());
        }
    }

    #[test]
    fn samples_are_clipped_to_the_box() {
        let g = Gaussian {
            mean: alloc::vec![0.9, -3.0],
            log_std: alloc::vec![MAX_STDDEV.ln(); 2],
        };
        let mut rng = PlannerRng::seed_from_u64(0);
        for _ in 0..1000 {
            let a = g.sample_clipped(&mut rng);
            assert!(a.iter().all(|x| (-1.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn odd_output_width_is_rejected() {
        assert!(GaussianPolicy::new(Mlp::zeros(&[2, 3])).is_err());
        assert_eq!(
            GaussianPolicy::new(Mlp::zeros(&[2, 4]))
                .unwrap()
                .action_dim(),
            2
        );
    }
}
