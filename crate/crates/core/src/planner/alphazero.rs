use alloc::vec::Vec;

use rand::SeedableRng;

use super::models::{Models, PlannerRng};
use super::plan::{openloop_select_plan, replay_plan};
use super::tree::{NodeId, SearchTree};
use super::{record, Algorithm, EpisodeResult, PlannerConfig};
use crate::env::Environment;
use crate::math::{exp, powf};
use crate::occupancy::{cbe_reward, puct_score};
use crate::{Result, StateVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AzVariant {
    Plain,
    /// Adds the subtree mean of count-based exploration rewards to each child's score.
    Cbe,
}

/// Continuous AlphaZero: PUCT selection with progressive widening.
pub struct AlphaZeroSearch<'a> {
    env: &'a dyn Environment,
    models: &'a dyn Models,
    cfg: PlannerConfig,
    variant: AzVariant,
    tree: SearchTree,
    rng: PlannerRng,
    simulations: u64,
    first_goal: Option<u64>,
}

impl<'a> AlphaZeroSearch<'a> {
    pub fn new(
        env: &'a dyn Environment,
        models: &'a dyn Models,
        cfg: &PlannerConfig,
        variant: AzVariant,
        root: StateVec,
        horizon: usize,
        rng: PlannerRng,
    ) -> Self {
        let reward = env.reward(&root);
        let mut tree = SearchTree::new(root, reward, horizon);
        let n = tree.node_mut(SearchTree::ROOT);
        n.initial_value = models.value(&root).max(cfg.floor(reward));
        n.intrinsic = 1.0;
        Self::from_tree(env, models, cfg, variant, tree, rng)
    }

    /// Continues searching an existing tree, e.g. a re-rooted subtree.
    pub fn from_tree(
        env: &'a dyn Environment,
        models: &'a dyn Models,
        cfg: &PlannerConfig,
        variant: AzVariant,
        tree: SearchTree,
        rng: PlannerRng,
    ) -> Self {
        AlphaZeroSearch {
            env,
            models,
            cfg: *cfg,
            variant,
            tree,
            rng,
            simulations: 0,
            first_goal: None,
        }
    }

    pub fn tree(&self) -> &SearchTree {
        &self.tree
    }

    pub fn into_parts(self) -> (SearchTree, PlannerRng) {
        (self.tree, self.rng)
    }

    pub fn simulations(&self) -> u64 {
        self.simulations
    }

    /// Simulation (1-based) that first created a goal node.
    pub fn first_goal_expansion(&self) -> Option<u64> {
        self.first_goal
    }

    fn leaf_value(&self, id: NodeId) -> f64 {
        let n = self.tree.node(id);
        n.mean_value()
            .unwrap_or(n.initial_value)
            .max(self.cfg.floor(n.reward))
    }

    fn should_widen(&self, id: NodeId) -> bool {
        let n = self.tree.node(id);
        let limit = self.cfg.pw_coeff * powf((n.visit_count + 1) as f64, self.cfg.pw_exponent);
        (n.children.len() as f64) < limit
    }

    /// Mean count-based exploration reward over the visits of `id`.
    pub fn exploration_value(&self, id: NodeId) -> f64 {
        let n = self.tree.node(id);
        if n.visit_count == 0 {
            n.intrinsic
        } else {
            n.intrinsic_sum / n.visit_count as f64
        }
    }

    /// Selection score of every child of `id`, in order.
    pub fn child_scores(&self, id: NodeId) -> Vec<f64> {
        let n = self.tree.node(id);
        let max_lp = n
            .children
            .iter()
            .map(|&c| self.tree.node(c).log_prior)
            .fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = n
            .children
            .iter()
            .map(|&c| exp(self.tree.node(c).log_prior - max_lp))
            .collect();
        let total: f64 = weights.iter().sum();
        n.children
            .iter()
            .zip(&weights)
            .map(|(&c, w)| {
                let child = self.tree.node(c);
                let q = child.mean_value().unwrap_or(child.initial_value);
                let mut score =
                    puct_score(q, w / total, n.visit_count, child.visit_count, self.cfg.c);
                if self.variant == AzVariant::Cbe {
                    score += self.cfg.cbe.coefficient * self.exploration_value(c);
                }
                score
            })
            .collect()
    }

    /// Child with the highest score; ties go to the lowest index.
    pub fn select_child(&self, id: NodeId) -> NodeId {
        let scores = self.child_scores(id);
        let mut best = 0;
        for (k, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = k;
            }
        }
        self.tree.node(id).children[best]
    }

    fn widen(&mut self, id: NodeId) -> NodeId {
        let state = self.tree.node(id).state;
        let action = self.models.sample_action(&state, &mut self.rng);
        let out = self.env.step(&state, &action);
        let next = out.next_state;
        let child = self.tree.add_child(
            id,
            action,
            next,
            out.reward,
            self.cfg.gamma,
            self.simulations,
        );
        let value = self.models.value(&next).max(self.cfg.floor(out.reward));
        let log_prior = self.models.log_density(&state, &action);
        let intrinsic = if self.variant == AzVariant::Cbe {
            cbe_reward(
                self.tree.nodes().iter().map(|n| &n.state),
                &next,
                &self.cfg.cbe,
            )
        } else {
            0.0
        };
        let n = self.tree.node_mut(child);
        n.initial_value = value;
        n.log_prior = log_prior;
        n.intrinsic = intrinsic;
        if out.terminal && self.first_goal.is_none() {
            self.first_goal = Some(self.simulations);
        }
        child
    }

    /// One selection, widening and backup pass.
    pub fn simulate(&mut self) {
        self.simulations += 1;
        let mut id = SearchTree::ROOT;
        let mut path = Vec::new();
        path.push(id);
        let leaf = loop {
            let n = self.tree.node(id);
            if n.terminal || n.depth as usize >= self.tree.horizon() {
                break id;
            }
            if self.should_widen(id) {
                let c = self.widen(id);
                path.push(c);
                break c;
            }
            id = self.select_child(id);
            path.push(id);
        };
        let mut value = self.leaf_value(leaf);
        let intrinsic = self.tree.node(leaf).intrinsic;
        let gamma = self.cfg.gamma;
        for (i, &id) in path.iter().enumerate().rev() {
            let n = self.tree.node_mut(id);
            if i + 1 < path.len() {
                value = n.reward + gamma * value;
            }
            n.value_sum += value;
            n.visit_count += 1;
            n.intrinsic_sum += intrinsic;
        }
        self.tree.node_mut(leaf).expansions += 1;
    }

    pub fn run(&mut self, simulations: usize) {
        for _ in 0..simulations {
            self.simulate();
        }
    }

    /// Most visited root child; ties go to the lowest index.
    pub fn best_root_child(&self) -> Option<NodeId> {
        let root = self.tree.root();
        let mut best: Option<NodeId> = None;
        for &c in &root.children {
            if best.is_none_or(|b| self.tree.node(c).visit_count > self.tree.node(b).visit_count) {
                best = Some(c);
            }
        }
        best
    }
}

fn variant_of(algorithm: Algorithm) -> AzVariant {
    if algorithm == Algorithm::AlphazeroCbe {
        AzVariant::Cbe
    } else {
        AzVariant::Plain
    }
}

fn mean_values(tree: &SearchTree) -> Vec<f64> {
    tree.nodes()
        .iter()
        .map(|n| n.mean_value().unwrap_or(n.initial_value))
        .collect()
}

pub(super) fn run_closed_loop(
    env: &dyn Environment,
    models: &dyn Models,
    cfg: &PlannerConfig,
) -> Result<EpisodeResult> {
    let variant = variant_of(cfg.algorithm);
    let per_step = (cfg.rollouts / cfg.horizon).max(1);
    let mut rng = PlannerRng::seed_from_u64(cfg.seed);
    let mut state = env.start_state();
    let mut carried: Option<SearchTree> = None;
    let mut actions = Vec::with_capacity(cfg.horizon);
    let mut consumed = 0u64;
    let mut ret = 0.0;
    let mut goal = None;
    let mut last_tree = SearchTree::new(state, env.reward(&state), cfg.horizon);
    for t in 0..cfg.horizon {
        let mut search = match carried.take() {
            Some(tree) => AlphaZeroSearch::from_tree(env, models, cfg, variant, tree, rng),
            None => AlphaZeroSearch::new(env, models, cfg, variant, state, cfg.horizon - t, rng),
        };
        search.run(per_step);
        consumed += per_step as u64;
        let child = search.best_root_child();
        let (tree, r) = search.into_parts();
        rng = r;
        let Some(child) = child else {
            last_tree = tree;
            break;
        };
        let action = tree.node(child).action.unwrap_or_else(|| env.stay_action());
        let out = env.step(&state, &action);
        actions.push(action);
        if out.terminal {
            ret = (cfg.horizon - t) as f64;
            goal = Some(consumed);
            last_tree = tree;
            break;
        }
        state = out.next_state;
        if cfg.reuse_subtree {
            carried = Some(tree.reroot(child, cfg.gamma));
        }
        last_tree = tree;
    }
    Ok(EpisodeResult {
        record: record(env, cfg, ret, goal),
        actions,
        node_values: mean_values(&last_tree),
        tree: last_tree,
    })
}

pub(super) fn run_open_loop(
    env: &dyn Environment,
    models: &dyn Models,
    cfg: &PlannerConfig,
) -> Result<EpisodeResult> {
    let rng = PlannerRng::seed_from_u64(cfg.seed);
    let mut search = AlphaZeroSearch::new(
        env,
        models,
        cfg,
        AzVariant::Plain,
        env.start_state(),
        cfg.horizon,
        rng,
    );
    search.run(cfg.rollouts);
    let first_goal = search.first_goal_expansion();
    let (tree, _) = search.into_parts();
    let plan = openloop_select_plan(&tree, env.stay_action());
    let summary = replay_plan(env, &plan, cfg.horizon, cfg.gamma)?;
    let expansions = if summary.success() { first_goal } else { None };
    Ok(EpisodeResult {
        record: record(env, cfg, summary.undiscounted, expansions),
        actions: plan,
        node_values: mean_values(&tree),
        tree,
    })
}
