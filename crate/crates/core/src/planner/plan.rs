use alloc::vec::Vec;

use super::tree::{earned_return, SearchTree};
use crate::env::{rollout_episode, Environment, EpisodeSummary};
use crate::{ActionVec, Result};

/// Action sequence to the node with the highest earned return, padded with
/// `stay` to the tree's horizon.
///
/// Without any goal node the deepest node is used. Ties go to the first node
/// in preorder.
pub fn openloop_select_plan(tree: &SearchTree, stay: ActionVec) -> Vec<ActionVec> {
    let horizon = tree.horizon();
    let mut best = SearchTree::ROOT;
    let mut best_key = (0.0, 0u32);
    for id in tree.preorder() {
        let n = tree.node(id);
        let earned = if n.terminal {
            earned_return(n.depth, horizon)
        } else {
            0.0
        };
        let key = (earned, n.depth);
        if key.0 > best_key.0 || (key.0 == best_key.0 && key.1 > best_key.1) {
            best = id;
            best_key = key;
        }
    }
    let mut plan = tree.actions_to(best);
    plan.truncate(horizon);
    plan.resize(horizon, stay);
    plan
}

/// Executes `plan` from the start state, stopping at the goal.
pub fn replay_plan(
    env: &dyn Environment,
    plan: &[ActionVec],
    horizon: usize,
    gamma: f64,
) -> Result<EpisodeSummary> {
    let stay = env.stay_action();
    let outcomes = rollout_episode(env, |t, _| plan.get(t).copied().unwrap_or(stay), horizon)?;
    Ok(EpisodeSummary::from_outcomes(&outcomes, gamma))
}
