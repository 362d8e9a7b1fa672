use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};

use super::models::{Models, PlannerRng, UntrainedModels};
use super::plan::{openloop_select_plan, replay_plan};
use super::tree::{NodeId, SearchTree};
use super::{record, Algorithm, EpisodeResult, PlannerConfig};
use crate::env::Environment;
use crate::math::powi;
use crate::occupancy::{
    tree_policy, tree_policy_action_reward_variant, Move, MoveScore, RegularizationSchedule,
    TreeMoveDistribution,
};
use crate::spatial::KdTree;
use crate::{Result, StateVec};

/// Where a descent currently is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentContext {
    /// Probability of reaching the node under the tree policy.
    pub reach_prob: f64,
    pub depth: u32,
    /// `gamma^depth`
    pub discount_weight: f64,
}

impl DescentContext {
    pub fn root() -> Self {
        DescentContext {
            reach_prob: 1.0,
            depth: 0,
            discount_weight: 1.0,
        }
    }

    fn child(self, p: f64, gamma: f64) -> Self {
        DescentContext {
            reach_prob: self.reach_prob * p,
            depth: self.depth + 1,
            discount_weight: self.discount_weight * gamma,
        }
    }

    /// Weight applied to every move value at this node.
    pub fn weight(&self) -> f64 {
        self.discount_weight * self.reach_prob
    }
}

/// A root-to-node path sampled from the tree policy; the last node is the one to expand.
#[derive(Debug, Clone, PartialEq)]
pub struct Descent {
    pub path: Vec<NodeId>,
    /// Probability of each sampled move, ending with the final STAY.
    pub move_probs: Vec<f64>,
    /// Probability of reaching the last node (excludes the final STAY).
    pub reach_prob: f64,
}

/// Volume-regularized tree search over a deterministic environment.
pub struct VolumeSearch<'a> {
    env: &'a dyn Environment,
    models: &'a dyn Models,
    cfg: PlannerConfig,
    zero_values: bool,
    schedule: RegularizationSchedule,
    tree: SearchTree,
    kd: KdTree,
    rng: PlannerRng,
    iteration: u64,
    total_volume: f64,
    first_goal: Option<u64>,
}

impl<'a> VolumeSearch<'a> {
    /// A one-node tree at the environment's start state. The zero-reward
    /// ablation is selected by `cfg.algorithm`.
    pub fn new(
        env: &'a dyn Environment,
        models: &'a dyn Models,
        cfg: &PlannerConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let zero_values = cfg.algorithm == Algorithm::VolumeRrtAblation;
        let start = env.start_state();
        let reward = env.reward(&start);
        let mut tree = SearchTree::new(start, reward, cfg.horizon);
        let mut kd = KdTree::with_capacity(*env.bounds(), cfg.rollouts + 1).with_rule(cfg.kd_split);
        let v0 = if zero_values {
            0.0
        } else {
            models.value(&start).max(cfg.floor(reward))
        };
        let rep = kd.insert(start, Some(v0), SearchTree::ROOT)?;
        let root = tree.node_mut(SearchTree::ROOT);
        root.kd_leaf = Some(rep.handle);
        root.own_volume = rep.volume;
        root.subtree_volume = rep.volume;
        root.initial_value = v0;
        Ok(VolumeSearch {
            env,
            models,
            cfg: *cfg,
            zero_values,
            schedule: RegularizationSchedule {
                c: cfg.c,
                gamma: cfg.gamma,
            },
            tree,
            kd,
            rng: PlannerRng::seed_from_u64(cfg.seed),
            iteration: 0,
            total_volume: env.bounds().volume(),
            first_goal: env.is_goal(&start).then_some(0),
        })
    }

    pub fn tree(&self) -> &SearchTree {
        &self.tree
    }

    pub fn into_tree(self) -> SearchTree {
        self.tree
    }

    pub fn kd(&self) -> &KdTree {
        &self.kd
    }

    pub fn iterations(&self) -> u64 {
        self.iteration
    }

    /// Iteration (1-based) that first created a goal node.
    pub fn first_goal_expansion(&self) -> Option<u64> {
        self.first_goal
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    /// Regularization weight for the next iteration.
    pub fn lambda(&self) -> f64 {
        self.schedule.lambda_of(self.iteration + 1)
    }

    /// Value estimate of a node: the k-d tree value at its state, floored.
    pub fn node_q(&self, id: NodeId) -> f64 {
        if self.zero_values {
            return 0.0;
        }
        let n = self.tree.node(id);
        let v = self.kd.value(&n.state).unwrap_or(n.initial_value);
        v.max(self.cfg.floor(n.reward))
    }

    fn is_duplicate(&self, state: &StateVec) -> bool {
        self.kd
            .locate(state)
            .is_ok_and(|h| self.kd.node(h).point() == Some(state))
    }

    fn fraction(&self, volume: f64) -> f64 {
        (volume / self.total_volume).max(f64::MIN_POSITIVE)
    }

    /// Tree policy over STAY followed by the children of `id`, in order.
    pub fn move_distribution(
        &self,
        id: NodeId,
        ctx: DescentContext,
        lambda: f64,
    ) -> Result<TreeMoveDistribution> {
        let n = self.tree.node(id);
        let w = ctx.weight();
        let mut scores = Vec::with_capacity(n.children.len() + 1);
        scores.push(MoveScore::new(
            Move::Stay,
            self.node_q(id),
            self.fraction(n.own_volume),
            w,
        ));
        for (k, &c) in n.children.iter().enumerate() {
            let child = self.tree.node(c);
            scores.push(MoveScore::new(
                Move::Child(k),
                self.node_q(c),
                self.fraction(child.subtree_volume),
                w,
            ));
        }
        if self.cfg.action_reward_variant {
            tree_policy_action_reward_variant(&scores, lambda, n.children.len())
        } else {
            tree_policy(&scores, lambda)
        }
    }

    /// Samples a descent without modifying the search.
    pub fn descend_with(&self, lambda: f64, rng: &mut PlannerRng) -> Result<Descent> {
        let mut id = SearchTree::ROOT;
        let mut ctx = DescentContext::root();
        let mut path = vec![id];
        let mut move_probs = Vec::new();
        loop {
            if self.tree.node(id).children.is_empty() {
                move_probs.push(1.0);
                break;
            }
            let dist = self.move_distribution(id, ctx, lambda)?;
            let (m, p) = dist.sample(rng.random::<f64>());
            move_probs.push(p);
            match m {
                Move::Stay => break,
                Move::Child(k) => {
                    ctx = ctx.child(p, self.cfg.gamma);
                    id = self.tree.node(id).children[k];
                    path.push(id);
                }
            }
        }
        debug_assert!({
            let prod: f64 = move_probs[..move_probs.len() - 1].iter().product();
            (prod - ctx.reach_prob).abs() <= 1e-12 * prod.max(1e-300)
        });
        Ok(Descent {
            path,
            move_probs,
            reach_prob: ctx.reach_prob,
        })
    }

    /// Expands `id` by one sampled action. Goal nodes and nodes at the
    /// horizon are absorbing: they return their own value and gain no child.
    pub fn expand(&mut self, id: NodeId) -> Result<(f64, Option<NodeId>)> {
        let node = self.tree.node(id);
        if node.terminal || node.depth as usize >= self.tree.horizon() {
            return Ok((self.node_q(id), None));
        }
        let state = node.state;
        let mut action = self.models.sample_action(&state, &mut self.rng);
        let mut out = self.env.step(&state, &action);
        for _ in 0..self.cfg.blocked_action_retries {
            if out.next_state != state {
                break;
            }
            action = self.models.sample_action(&state, &mut self.rng);
            out = self.env.step(&state, &action);
        }
        let next = out.next_state;
        let child =
            self.tree
                .add_child(id, action, next, out.reward, self.cfg.gamma, self.iteration);
        let v_theta = if self.zero_values {
            0.0
        } else {
            self.models.value(&next).max(self.cfg.floor(out.reward))
        };
        self.tree.node_mut(child).initial_value = v_theta;
        if self.cfg.merge_duplicate_states && self.is_duplicate(&next) {
            self.kd.backprop(v_theta, &next)?;
        } else {
            let rep = self.kd.insert(next, Some(v_theta), child)?;
            if let Some(split) = rep.split {
                let m = split.old_payload;
                let old = self.tree.node(m).own_volume;
                debug_assert!((old - split.old_volume).abs() <= 1e-12 * old.max(1.0));
                let n = self.tree.node_mut(m);
                n.kd_leaf = Some(split.old_handle);
                n.own_volume = split.new_old_volume;
                self.tree.add_subtree_volume(m, split.new_old_volume - old);
            }
            let c = self.tree.node_mut(child);
            c.kd_leaf = Some(rep.handle);
            c.own_volume = rep.volume;
            self.tree.add_subtree_volume(child, rep.volume);
        }
        if out.terminal && self.first_goal.is_none() {
            self.first_goal = Some(self.iteration);
        }
        let v_hat = if self.zero_values {
            0.0
        } else {
            self.node_q(child)
        };
        Ok((v_hat, Some(child)))
    }

    fn backup(&mut self, path: &[NodeId], leaf_value: f64) -> Result<()> {
        let gamma = self.cfg.gamma;
        let mut value = leaf_value;
        for &id in path.iter().rev() {
            let n = self.tree.node_mut(id);
            let r = if self.zero_values { 0.0 } else { n.reward };
            value = r + gamma * value;
            n.value_sum += value;
            n.visit_count += 1;
            let state = n.state;
            self.kd.backprop(value, &state)?;
        }
        if let Some(&last) = path.last() {
            self.tree.node_mut(last).expansions += 1;
        }
        Ok(())
    }

    /// One descent, expansion and backup. Returns the created child, if any.
    pub fn iterate(&mut self) -> Result<Option<NodeId>> {
        self.iteration += 1;
        let lambda = self.schedule.lambda_of(self.iteration);
        let mut rng = self.rng.clone();
        let descent = self.descend_with(lambda, &mut rng)?;
        self.rng = rng;
        let leaf = *descent.path.last().expect("descent path is never empty");
        let (value, child) = self.expand(leaf)?;
        self.backup(&descent.path, value)?;
        Ok(child)
    }

    pub fn run(&mut self, iterations: usize) -> Result<()> {
        for _ in 0..iterations {
            self.iterate()?;
        }
        Ok(())
    }

    /// Runs until a goal node exists or `max_iterations` have been spent.
    pub fn run_until_goal(&mut self, max_iterations: u64) -> Result<Option<u64>> {
        while self.first_goal.is_none() && self.iteration < max_iterations {
            self.iterate()?;
        }
        Ok(self.first_goal)
    }

    /// Discounted value of the whole search path up to and including `id`'s estimate.
    pub fn path_value(&self, id: NodeId) -> f64 {
        let n = self.tree.node(id);
        n.path_reward + powi(self.cfg.gamma, n.depth as i32) * self.node_q(id)
    }
}

pub(super) fn run_open_loop(
    env: &dyn Environment,
    models: &dyn Models,
    cfg: &PlannerConfig,
) -> Result<EpisodeResult> {
    let untrained = UntrainedModels::new(env.action_dim());
    let models: &dyn Models = if cfg.algorithm == Algorithm::VolumeRrtAblation {
        &untrained
    } else {
        models
    };
    let mut search = VolumeSearch::new(env, models, cfg)?;
    if cfg.algorithm == Algorithm::VolumeRrtAblation && cfg.ablation_stops_at_goal {
        search.run_until_goal(cfg.rollouts as u64)?;
    } else {
        search.run(cfg.rollouts)?;
    }
    let first_goal = search.first_goal_expansion();
    let node_values = (0..search.tree().len())
        .map(|id| search.node_q(id))
        .collect();
    let tree = search.into_tree();
    let plan = openloop_select_plan(&tree, env.stay_action());
    let summary = replay_plan(env, &plan, cfg.horizon, cfg.gamma)?;
    debug_assert_eq!(summary.undiscounted, tree.root().max_earned_return);
    let expansions = if summary.success() { first_goal } else { None };
    Ok(EpisodeResult {
        record: record(env, cfg, summary.undiscounted, expansions),
        actions: plan,
        tree,
        node_values,
    })
}
