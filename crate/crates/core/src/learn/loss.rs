use alloc::vec;
use alloc::vec::Vec;

use super::mlp::Mlp;
use super::policy::{split_head, GaussianPolicy, MAX_STDDEV, MIN_STDDEV};
use crate::math::{exp, ln};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct LossCoefficients {
    pub value: f64,
    pub kl: f64,
    pub advantage: f64,
}

impl Default for LossCoefficients {
    fn default() -> Self {
        LossCoefficients {
            value: 1.0,
            kl: 10.0,
            advantage: 1.0,
        }
    }
}

/// One training example: a tree node with at least one expanded action.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample {
    /// Network input (already scaled).
    pub state: Vec<f64>,
    pub value_target: f64,
    /// Visited actions with their advantages.
    pub actions: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub struct TrainBatch<'a> {
    pub samples: &'a [&'a TrainSample],
    pub coefficients: LossCoefficients,
    /// Regularization weight at the time the data was collected.
    pub lambda: f64,
}

/// Value network plus policy network.
#[derive(Debug, Clone, PartialEq)]
pub struct Nets {
    pub value: Mlp,
    pub policy: GaussianPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub value: Vec<f64>,
    pub policy: Vec<f64>,
}

impl Nets {
    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            value: vec![0.0; self.value.param_count()],
            policy: vec![0.0; self.policy.net().param_count()],
        }
    }
}

/// Batch-mean of `c_V (V - target)^2 + c_KL * lambda * KL(N(0, I) || pi) - c_A * sum_a A(a) log pi(a)`
/// and its gradient.
pub fn loss_and_grads(nets: &Nets, batch: &TrainBatch<'_>) -> Result<(f64, Gradients)> {
    let mut grads = nets.zero_gradients();
    if batch.samples.is_empty() {
        return Ok((0.0, grads));
    }
    let c = batch.coefficients;
    let scale = 1.0 / batch.samples.len() as f64;
    let (lo, hi) = (ln(MIN_STDDEV), ln(MAX_STDDEV));
    let mut loss = 0.0;
    for s in batch.samples {
        let vt = nets.value.forward_trace(&s.state)?;
        let err = vt.output()[0] - s.value_target;
        loss += c.value * err * err;
        nets.value
            .backward(&vt, &[2.0 * c.value * err * scale], &mut grads.value);

        let pt = nets.policy.net().forward_trace(&s.state)?;
        let raw = pt.output();
        let g = split_head(raw);
        let d = g.dim();
        let kl_w = c.kl * batch.lambda;
        loss += kl_w * g.kl_from_unit();
        let mut head = vec![0.0; 2 * d];
        for j in 0..d {
            let (m, ls) = (g.mean[j], g.log_std[j]);
            let inv_var = exp(-2.0 * ls);
            head[j] = kl_w * m * inv_var;
            head[d + j] = kl_w * (1.0 - (1.0 + m * m) * inv_var);
        }
        for (a, adv) in &s.actions {
            if a.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: a.len(),
                });
            }
            loss -= c.advantage * adv * g.log_density(a);
            for j in 0..d {
                let inv_var = exp(-2.0 * g.log_std[j]);
                let r = a[j] - g.mean[j];
                head[j] -= c.advantage * adv * r * inv_var;
                head[d + j] -= c.advantage * adv * (r * r * inv_var - 1.0);
            }
        }
        for j in 0..d {
            // the clamp is flat outside its range
            if raw[d + j] < lo || raw[d + j] > hi {
                head[d + j] = 0.0;
            }
        }
        for h in &mut head {
            *h *= scale;
        }
        nets.policy.net().backward(&pt, &head, &mut grads.policy);
    }
    let loss = loss * scale;
    if !loss.is_finite() {
        return Err(Error::TrainingDiverged);
    }
    Ok((loss, grads))
}
