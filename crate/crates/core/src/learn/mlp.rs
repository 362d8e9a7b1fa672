use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::math::sqrt;
use crate::{Error, Result};

/// Fully connected ReLU network with a linear output layer.
///
/// Parameters live in one flat buffer. Layer `l` stores its weight matrix
/// row-major (`out x in`) followed by its bias vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    widths: Vec<usize>,
    params: Vec<f64>,
}

/// Post-activation outputs of every layer, input first.
#[derive(Debug, Clone)]
pub(crate) struct Trace {
    acts: Vec<Vec<f64>>,
}

impl Trace {
    pub(crate) fn output(&self) -> &[f64] {
        self.acts.last().expect("trace has an input layer")
    }
}

fn param_count(widths: &[usize]) -> usize {
    widths.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

impl Mlp {
    /// All parameters zero.
    pub fn zeros(widths: &[usize]) -> Self {
        assert!(
            widths.len() >= 2 && widths.iter().all(|&w| w > 0),
            "need at least two non-empty layers"
        );
        Mlp {
            widths: widths.to_vec(),
            params: vec![0.0; param_count(widths)],
        }
    }

    /// He-normal weights and zero biases.
    pub fn new<R: Rng + ?Sized>(widths: &[usize], rng: &mut R) -> Self {
        let mut net = Self::zeros(widths);
        for l in 0..net.layers() {
            let fan_in = net.widths[l];
            let std = sqrt(2.0 / fan_in as f64);
            let (w, _) = net.layer_range(l);
            for p in &mut net.params[w] {
                let z: f64 = StandardNormal.sample(rng);
                *p = std * z;
            }
        }
        net
    }

    /// Zeroes the last layer so the network starts out emitting 0.
    pub fn with_zero_output_layer(mut self) -> Self {
        let last = self.layers() - 1;
        let (w, b) = self.layer_range(last);
        self.params[w.start..b.end].fill(0.0);
        self
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Builds a network from explicit parameters.
    pub fn from_params(widths: &[usize], params: Vec<f64>) -> Result<Self> {
        let net = Self::zeros(widths);
        if params.len() != net.params.len() {
            return Err(Error::DimensionMismatch {
                expected: net.params.len(),
                got: params.len(),
            });
        }
        Ok(Mlp { params, ..net })
    }

    fn layer_range(&self, l: usize) -> (core::ops::Range<usize>, core::ops::Range<usize>) {
        let start = param_count(&self.widths[..=l]);
        let (fan_in, fan_out) = (self.widths[l], self.widths[l + 1]);
        let w = start..start + fan_in * fan_out;
        (w.clone(), w.end..w.end + fan_out)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn layer_forward(&self, l: usize, input: &[f64], relu: bool) -> Vec<f64> {
        let (w, b) = self.layer_range(l);
        let (weights, biases) = (&self.params[w], &self.params[b]);
        let fan_in = input.len();
        biases
            .iter()
            .enumerate()
            .map(|(o, bias)| {
                let row = &weights[o * fan_in..(o + 1) * fan_in];
                let z = bias + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                if relu {
                    z.max(0.0)
                } else {
                    z
                }
            })
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut h = x.to_vec();
        for l in 0..self.layers() {
            h = self.layer_forward(l, &h, l + 1 < self.layers());
        }
        Ok(h)
    }

    pub fn forward_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        xs.iter().map(|x| self.forward(x)).collect()
    }

    pub(crate) fn forward_trace(&self, x: &[f64]) -> Result<Trace> {
        self.check_input(x)?;
        let mut acts = Vec::with_capacity(self.widths.len());
        acts.push(x.to_vec());
        for l in 0..self.layers() {
            let h = self.layer_forward(l, &acts[l], l + 1 < self.layers());
            acts.push(h);
        }
        Ok(Trace { acts })
    }

    /// Accumulates `d loss / d params` into `grads` given `d loss / d output`.
    pub(crate) fn backward(&self, trace: &Trace, grad_out: &[f64], grads: &mut [f64]) {
        debug_assert_eq!(grads.len(), self.params.len());
        let mut delta = grad_out.to_vec();
        for l in (0..self.layers()).rev() {
            let (w, b) = self.layer_range(l);
            let input = &trace.acts[l];
            let fan_in = input.len();
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                grads[b.start + o] += d;
                let row = &mut grads[w.start + o * fan_in..w.start + (o + 1) * fan_in];
                for (g, a) in row.iter_mut().zip(input) {
                    *g += d * a;
                }
            }
            if l == 0 {
                break;
            }
            let weights = &self.params[w];
            let mut prev = vec![0.0; fan_in];
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                for (p, wt) in prev.iter_mut().zip(&weights[o * fan_in..(o + 1) * fan_in]) {
                    *p += d * wt;
                }
            }
            // ReLU derivative, read off the stored activation
            for (p, a) in prev.iter_mut().zip(input) {
                if *a <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }
}

/// Scalar output of a one-output network.
pub fn value_forward(net: &Mlp, state: &[f64]) -> Result<f64> {
    if net.output_dim() != 1 {
        return Err(Error::InvalidArgument(
            "value network must have a single output",
        ));
    }
    Ok(net.forward(state)?[0])
}
