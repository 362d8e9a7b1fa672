use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::adam::{Adam, AdamConfig};
use super::loss::{loss_and_grads, LossCoefficients, Nets, TrainBatch, TrainSample};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TrainConfig {
    pub batch_size: usize,
    /// Mini-batches per call to [`train_epoch`].
    pub batches: usize,
    pub coefficients: LossCoefficients,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 256,
            batches: 40,
            coefficients: LossCoefficients::default(),
            adam: AdamConfig::default(),
        }
    }
}

/// Optimizer state for both networks.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub value: Adam,
    pub policy: Adam,
}

impl OptimizerState {
    pub fn new(cfg: AdamConfig, nets: &Nets) -> Self {
        OptimizerState {
            value: Adam::new(cfg, nets.value.param_count()),
            policy: Adam::new(cfg, nets.policy.net().param_count()),
        }
    }
}

/// Runs `cfg.batches` shuffled mini-batches and returns the loss of each.
///
/// Batches are consecutive slices of one permutation, reshuffled whenever
/// it runs out.
pub fn train_epoch<R: Rng + ?Sized>(
    nets: &mut Nets,
    dataset: &[TrainSample],
    lambda: f64,
    opt: &mut OptimizerState,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut trace = Vec::new();
    if dataset.is_empty() || cfg.batch_size == 0 {
        return Ok(trace);
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(rng);
    let mut cursor = 0;
    for _ in 0..cfg.batches {
        if cursor >= order.len() {
            order.shuffle(rng);
            cursor = 0;
        }
        let end = (cursor + cfg.batch_size).min(order.len());
        let samples: Vec<&TrainSample> = order[cursor..end].iter().map(|&i| &dataset[i]).collect();
        cursor = end;
        let batch = TrainBatch {
            samples: &samples,
            coefficients: cfg.coefficients,
            lambda,
        };
        let (loss, grads) = loss_and_grads(nets, &batch)?;
        opt.value.step(nets.value.params_mut(), &grads.value);
        opt.policy
            .step(nets.policy.net_mut().params_mut(), &grads.policy);
        trace.push(loss);
    }
    Ok(trace)
}

/// Mean squared error of the value head on `dataset`.
pub fn value_mse(nets: &Nets, dataset: &[TrainSample]) -> Result<f64> {
    if dataset.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for s in dataset {
        let e = nets.value.forward(&s.state)?[0] - s.value_target;
        total += e * e;
    }
    Ok(total / dataset.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::{GaussianPolicy, Mlp};
    use crate::planner::PlannerRng;
    use alloc::vec;
    use rand::SeedableRng;

    fn nets(seed: u64, hidden: usize) -> Nets {
        let mut rng = PlannerRng::seed_from_u64(seed);
        Nets {
            value: Mlp::new(&[2, hidden, hidden, 1], &mut rng),
            policy: GaussianPolicy::new(
                Mlp::new(&[2, hidden, 4], &mut rng).with_zero_output_layer(),
            )
            .unwrap(),
        }
    }

    #[test]
    fn empty_dataset_leaves_nets_unchanged() {
        let mut n = nets(0, 8);
        let before = n.clone();
        let mut opt = OptimizerState::new(AdamConfig::default(), &n);
        let mut rng = PlannerRng::seed_from_u64(0);
        let trace = train_epoch(
            &mut n,
            &[],
            1.0,
            &mut opt,
            &TrainConfig::default(),
            &mut rng,
        )
        .unwrap();
        assert!(trace.is_empty());
        assert_eq!(n, before);
    }

    fn regression_set(n: usize, seed: u64) -> Vec<TrainSample> {
        let mut rng = PlannerRng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let x: f64 = rng.random_range(-1.0..1.0);
                let y: f64 = rng.random_range(-1.0..1.0);
                TrainSample {
                    state: vec![x, y],
                    value_target: 0.5 * x + y * y - 0.3 * x * y,
                    actions: vec![],
                }
            })
            .collect()
    }

    #[test]
    fn fits_a_smooth_function() {
        let data = regression_set(500, 5);
        let mut n = nets(1, 64);
        let cfg = TrainConfig {
            batch_size: 64,
            batches: 1500,
            coefficients: LossCoefficients {
                value: 1.0,
                kl: 0.0,
                advantage: 0.0,
            },
            ..Default::default()
        };
        let mut opt = OptimizerState::new(cfg.adam, &n);
        let mut rng = PlannerRng::seed_from_u64(2);
        train_epoch(&mut n, &data, 0.0, &mut opt, &cfg, &mut rng).unwrap();
        let mse = value_mse(&n, &data).unwrap();
        assert!(mse < 0.01, "mse {mse}");
    }

    #[test]
    fn same_seed_same_loss_trace() {
        let data = regression_set(100, 9);
        let cfg = TrainConfig {
            batch_size: 32,
            batches: 10,
            ..Default::default()
        };
        let run = || {
            let mut n = nets(4, 16);
            let mut opt = OptimizerState::new(cfg.adam, &n);
            let mut rng = PlannerRng::seed_from_u64(8);
            train_epoch(&mut n, &data, 0.3, &mut opt, &cfg, &mut rng).unwrap()
        };
        let a = run();
        assert_eq!(a.len(), 10);
        assert_eq!(a, run());
    }
}
