//! Value and policy networks trained from search trees.
//!
//! Networks are plain ReLU MLPs with hand-written backprop. The policy is a
//! diagonal Gaussian regularized towards a unit Gaussian prior; its
//! advantage term uses the log-density surrogate
//! `-c_A * sum_a A(a) log pi(a)`.

mod adam;
mod data;
mod loss;
mod mlp;
mod policy;
mod train;

pub use adam::{Adam, AdamConfig};
pub use data::{collect_samples, InputScaler, NetworkModels};
pub use loss::{loss_and_grads, Gradients, LossCoefficients, Nets, TrainBatch, TrainSample};
pub use mlp::{value_forward, Mlp};
pub use policy::{Gaussian, GaussianPolicy, MAX_STDDEV, MIN_STDDEV};
pub use train::{train_epoch, value_mse, OptimizerState, TrainConfig};

use rand::Rng;

/// Hidden layer widths of the default networks.
pub const HIDDEN: [usize; 3] = [256, 256, 256];

impl Nets {
    /// Default-shaped networks whose output layers start at zero, so the
    /// untrained value is 0 and the untrained policy is the unit Gaussian.
    pub fn init<R: Rng + ?Sized>(state_dim: usize, action_dim: usize, rng: &mut R) -> Self {
        let [h1, h2, h3] = HIDDEN;
        let value = Mlp::new(&[state_dim, h1, h2, h3, 1], rng).with_zero_output_layer();
        let policy =
            Mlp::new(&[state_dim, h1, h2, h3, 2 * action_dim], rng).with_zero_output_layer();
        Nets {
            value,
            policy: GaussianPolicy::new(policy).expect("even output width"),
        }
    }
}
