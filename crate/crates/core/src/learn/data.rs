use alloc::vec::Vec;

use super::loss::{Nets, TrainSample};
use crate::env::BoxBounds;
use crate::planner::{EpisodeResult, Models, PlannerRng};
use crate::{ActionVec, StateVec};

/// Affine map from the state box onto `[-1, 1]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputScaler {
    bounds: BoxBounds,
}

impl InputScaler {
    pub fn new(bounds: BoxBounds) -> Self {
        InputScaler { bounds }
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn scale(&self, s: &StateVec) -> Vec<f64> {
        s.iter()
            .enumerate()
            .map(|(d, x)| 2.0 * (x - self.bounds.low[d]) / self.bounds.side(d) - 1.0)
            .collect()
    }
}

/// Training examples from every node that has at least one child.
///
/// The value target is the planner's estimate at the node. An action's
/// advantage is `R(n) + gamma * v(child) - mean(n)`, where `mean(n)` is the
/// backed-up return through the node and `v(child)` is the child's backed-up
/// return, or its estimate if it was never descended into.
pub fn collect_samples(
    result: &EpisodeResult,
    scaler: &InputScaler,
    gamma: f64,
) -> Vec<TrainSample> {
    let tree = &result.tree;
    let mut out = Vec::new();
    for (id, n) in tree.nodes().iter().enumerate() {
        let Some(node_mean) = n.mean_value() else {
            continue;
        };
        let actions: Vec<(Vec<f64>, f64)> = n
            .children
            .iter()
            .filter_map(|&c| {
                let child = tree.node(c);
                let a = child.action?;
                let v = child.mean_value().unwrap_or(result.node_values[c]);
                let q = n.reward + gamma * v;
                Some((a.to_vec(), q - node_mean))
            })
            .collect();
        if actions.is_empty() {
            continue;
        }
        out.push(TrainSample {
            state: scaler.scale(&n.state),
            value_target: result.node_values[id],
            actions,
        });
    }
    out
}

/// Planner models backed by trained networks.
#[derive(Debug, Clone)]
pub struct NetworkModels {
    pub nets: Nets,
    pub scaler: InputScaler,
}

impl NetworkModels {
    /// Panics when the network widths do not match the scaler and action dimensions.
    pub fn new(nets: Nets, scaler: InputScaler) -> Self {
        assert_eq!(
            nets.value.input_dim(),
            scaler.dim(),
            "value net input width"
        );
        assert_eq!(nets.value.output_dim(), 1, "value net output width");
        assert_eq!(
            nets.policy.net().input_dim(),
            scaler.dim(),
            "policy net input width"
        );
        NetworkModels { nets, scaler }
    }
}

impl Models for NetworkModels {
    fn value(&self, state: &StateVec) -> f64 {
        self.nets
            .value
            .forward(&self.scaler.scale(state))
            .map(|o| o[0])
            .unwrap_or(0.0)
    }

    fn sample_action(&self, state: &StateVec, rng: &mut PlannerRng) -> ActionVec {
        match self.nets.policy.distribution(&self.scaler.scale(state)) {
            Ok(g) => ActionVec::new(&g.sample_clipped(rng)),
            Err(_) => ActionVec::zeros(self.nets.policy.action_dim()),
        }
    }

    fn log_density(&self, state: &StateVec, action: &ActionVec) -> f64 {
        self.nets
            .policy
            .distribution(&self.scaler.scale(state))
            .map(|g| g.log_density(action))
            .unwrap_or(0.0)
    }
}
