use alloc::vec;
use alloc::vec::Vec;

use crate::spatial::KdHandle;
use crate::{ActionVec, StateVec};

/// Index of a node in a [`SearchTree`] arena.
pub type NodeId = usize;

/// One search-tree node.
///
/// Values are values-to-go that include the node's own state reward:
/// `V(n) = R(s_n) + gamma * V(child)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchNode {
    pub state: StateVec,
    pub parent: Option<NodeId>,
    /// Action taken in the parent to reach this node.
    pub action: Option<ActionVec>,
    pub children: Vec<NodeId>,
    pub depth: u32,
    pub reward: f64,
    pub terminal: bool,
    /// `sum_{i < depth} gamma^i R(s_i)` over the ancestors' states.
    pub path_reward: f64,
    pub value_sum: f64,
    pub visit_count: u64,
    /// Number of descents that ended at this node.
    pub expansions: u64,
    /// Value estimate recorded when the node was created.
    pub initial_value: f64,
    pub kd_leaf: Option<KdHandle>,
    pub own_volume: f64,
    pub subtree_volume: f64,
    /// Best undiscounted episode return of any goal node in this subtree.
    pub max_earned_return: f64,
    /// Iteration (1-based) that created the node; 0 for the root.
    pub created_at: u64,
    /// Count-based exploration reward assigned at creation.
    pub intrinsic: f64,
    pub intrinsic_sum: f64,
    /// Policy log-density of `action` at the parent's state.
    pub log_prior: f64,
}

impl SearchNode {
    pub fn mean_value(&self) -> Option<f64> {
        (self.visit_count > 0).then(|| self.value_sum / self.visit_count as f64)
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Arena of search nodes; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchTree {
    nodes: Vec<SearchNode>,
    horizon: usize,
}

/// Undiscounted return of an episode whose goal node sits at `depth` (one step per level).
pub fn earned_return(depth: u32, horizon: usize) -> f64 {
    let d = depth as usize;
    if d == 0 || d > horizon {
        0.0
    } else {
        (horizon + 1 - d) as f64
    }
}

impl SearchTree {
    pub fn new(root_state: StateVec, root_reward: f64, horizon: usize) -> Self {
        let root = SearchNode {
            state: root_state,
            parent: None,
            action: None,
            children: Vec::new(),
            depth: 0,
            reward: root_reward,
            terminal: root_reward >= 1.0,
            path_reward: 0.0,
            value_sum: 0.0,
            visit_count: 0,
            expansions: 0,
            initial_value: 0.0,
            kd_leaf: None,
            own_volume: 0.0,
            subtree_volume: 0.0,
            max_earned_return: 0.0,
            created_at: 0,
            intrinsic: 0.0,
            intrinsic_sum: 0.0,
            log_prior: 0.0,
        };
        SearchTree {
            nodes: vec![root],
            horizon,
        }
    }

    pub const ROOT: NodeId = 0;

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> &SearchNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut SearchNode {
        &mut self.nodes[id]
    }

    pub fn nodes(&self) -> &[SearchNode] {
        &self.nodes
    }

    /// Appends a child and propagates its earned return to the ancestors.
    pub fn add_child(
        &mut self,
        parent: NodeId,
        action: ActionVec,
        state: StateVec,
        reward: f64,
        gamma: f64,
        created_at: u64,
    ) -> NodeId {
        let id = self.nodes.len();
        let p = &self.nodes[parent];
        let depth = p.depth + 1;
        let path_reward = p.path_reward + crate::math::powi(gamma, p.depth as i32) * p.reward;
        let terminal = reward >= 1.0;
        let earned = if terminal {
            earned_return(depth, self.horizon)
        } else {
            0.0
        };
        self.nodes.push(SearchNode {
            state,
            parent: Some(parent),
            action: Some(action),
            children: Vec::new(),
            depth,
            reward,
            terminal,
            path_reward,
            value_sum: 0.0,
            visit_count: 0,
            expansions: 0,
            initial_value: 0.0,
            kd_leaf: None,
            own_volume: 0.0,
            subtree_volume: 0.0,
            max_earned_return: earned,
            created_at,
            intrinsic: 0.0,
            intrinsic_sum: 0.0,
            log_prior: 0.0,
        });
        self.nodes[parent].children.push(id);
        if earned > 0.0 {
            let mut cur = Some(parent);
            while let Some(c) = cur {
                let n = &mut self.nodes[c];
                if n.max_earned_return >= earned {
                    break;
                }
                n.max_earned_return = earned;
                cur = n.parent;
            }
        }
        id
    }

    /// Node ids from the root to `id`, inclusive.
    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = self.nodes[id].parent;
        while let Some(p) = cur {
            path.push(p);
            cur = self.nodes[p].parent;
        }
        path.reverse();
        path
    }

    /// Actions along the path from the root to `id`.
    pub fn actions_to(&self, id: NodeId) -> Vec<ActionVec> {
        self.path_to(id)
            .iter()
            .skip(1)
            .filter_map(|&n| self.nodes[n].action)
            .collect()
    }

    /// Depth-first preorder with children in insertion order.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![Self::ROOT];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.nodes[n].children.iter().rev());
        }
        out
    }

    /// Adds `delta` to the subtree volume of `id` and every ancestor.
    pub(crate) fn add_subtree_volume(&mut self, id: NodeId, delta: f64) {
        let mut cur = Some(id);
        while let Some(c) = cur {
            self.nodes[c].subtree_volume += delta;
            cur = self.nodes[c].parent;
        }
    }

    /// Re-roots the tree at `id`, keeping only its subtree. Depths, path
    /// rewards and earned returns are recomputed relative to the new root;
    /// volumes and kd handles are copied unchanged.
    pub fn reroot(&self, id: NodeId, gamma: f64) -> SearchTree {
        let horizon = self.horizon.saturating_sub(self.nodes[id].depth as usize);
        let mut out = SearchTree {
            nodes: Vec::new(),
            horizon,
        };
        let mut map: Vec<(NodeId, Option<NodeId>)> = vec![(id, None)];
        while let Some((old, new_parent)) = map.pop() {
            let src = &self.nodes[old];
            let new_id = out.nodes.len();
            let (depth, path_reward) = match new_parent {
                None => (0, 0.0),
                Some(p) => {
                    let pn = &out.nodes[p];
                    (
                        pn.depth + 1,
                        pn.path_reward + crate::math::powi(gamma, pn.depth as i32) * pn.reward,
                    )
                }
            };
            let mut n = src.clone();
            n.parent = new_parent;
            n.children = Vec::new();
            n.depth = depth;
            n.path_reward = path_reward;
            n.max_earned_return = if n.terminal && depth > 0 {
                earned_return(depth, horizon)
            } else {
                0.0
            };
            if new_parent.is_none() {
                n.action = None;
            }
            out.nodes.push(n);
            if let Some(p) = new_parent {
                out.nodes[p].children.push(new_id);
            }
            for &c in src.children.iter().rev() {
                map.push((c, Some(new_id)));
            }
        }
        // children were pushed in reverse, so ids follow preorder; earned returns
        // propagate from the deepest ids upward
        for i in (1..out.nodes.len()).rev() {
            let e = out.nodes[i].max_earned_return;
            let p = out.nodes[i].parent.unwrap_or(0);
            if e > out.nodes[p].max_earned_return {
                out.nodes[p].max_earned_return = e;
            }
        }
        out
    }

    /// Checks `subtree_volume = own_volume + sum(children subtree_volume)` at
    /// every node and that the root holds `total`. On failure returns the path
    /// to the offending node.
    pub fn audit_volumes(&self, total: f64, rel_tol: f64) -> Result<(), AuditFailure> {
        let tol = rel_tol * total.abs().max(1.0);
        let root = self.root().subtree_volume;
        if (root - total).abs() > tol {
            return Err(AuditFailure {
                path: vec![Self::ROOT],
                expected: total,
                found: root,
            });
        }
        for (id, n) in self.nodes.iter().enumerate() {
            let expected = n.own_volume
                + n.children
                    .iter()
                    .map(|&c| self.nodes[c].subtree_volume)
                    .sum::<f64>();
            if (expected - n.subtree_volume).abs() > tol
                || n.own_volume < 0.0
                || (n.kd_leaf.is_some() && n.own_volume == 0.0)
            {
                return Err(AuditFailure {
                    path: self.path_to(id),
                    expected,
                    found: n.subtree_volume,
                });
            }
        }
        Ok(())
    }

    /// Checks `visit_count = expansions + sum(children visit_count)` at every node.
    pub fn audit_visits(&self) -> Result<(), AuditFailure> {
        for (id, n) in self.nodes.iter().enumerate() {
            let expected = n.expansions
                + n.children
                    .iter()
                    .map(|&c| self.nodes[c].visit_count)
                    .sum::<u64>();
            if expected != n.visit_count {
                return Err(AuditFailure {
                    path: self.path_to(id),
                    expected: expected as f64,
                    found: n.visit_count as f64,
                });
            }
        }
        Ok(())
    }
}

/// A violated tree invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditFailure {
    /// Node ids from the root to the offending node.
    pub path: Vec<NodeId>,
    pub expected: f64,
    pub found: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(x: f64) -> StateVec {
        StateVec::new(&[x, 0.0])
    }

    fn av() -> ActionVec {
        ActionVec::zeros(2)
    }

    #[test]
    fn earned_return_counts_remaining_steps() {
        assert_eq!(earned_return(1, 50), 50.0);
        assert_eq!(earned_return(50, 50), 1.0);
        assert_eq!(earned_return(0, 50), 0.0);
        assert_eq!(earned_return(51, 50), 0.0);
    }

    #[test]
    fn goal_child_updates_ancestors() {
        let mut t = SearchTree::new(sv(0.0), 0.0, 50);
        let a = t.add_child(0, av(), sv(1.0), 0.0, 0.9, 1);
        let b = t.add_child(a, av(), sv(2.0), 1.0, 0.9, 2);
        assert!(t.node(b).terminal);
        assert_eq!(t.node(b).max_earned_return, 49.0);
        assert_eq!(t.node(a).max_earned_return, 49.0);
        assert_eq!(t.root().max_earned_return, 49.0);
        assert_eq!(t.path_to(b), vec![0, a, b]);
        assert_eq!(t.actions_to(b).len(), 2);
    }

    #[test]
    fn path_reward_discounts_ancestor_rewards() {
        let mut t = SearchTree::new(sv(0.0), 1.0, 50);
        let a = t.add_child(0, av(), sv(1.0), 1.0, 0.5, 1);
        let b = t.add_child(a, av(), sv(2.0), 0.0, 0.5, 2);
        assert_eq!(t.node(a).path_reward, 1.0);
        assert_eq!(t.node(b).path_reward, 1.5);
    }

    #[test]
    fn preorder_visits_children_in_order() {
        let mut t = SearchTree::new(sv(0.0), 0.0, 50);
        let a = t.add_child(0, av(), sv(1.0), 0.0, 0.9, 1);
        let b = t.add_child(0, av(), sv(2.0), 0.0, 0.9, 2);
        let c = t.add_child(a, av(), sv(3.0), 0.0, 0.9, 3);
        assert_eq!(t.preorder(), vec![0, a, c, b]);
    }

    #[test]
    fn reroot_shifts_depths_and_returns() {
        let mut t = SearchTree::new(sv(0.0), 0.0, 10);
        let a = t.add_child(0, av(), sv(1.0), 0.0, 0.9, 1);
        let b = t.add_child(a, av(), sv(2.0), 0.0, 0.9, 2);
        let g = t.add_child(b, av(), sv(3.0), 1.0, 0.9, 3);
        assert_eq!(t.node(g).max_earned_return, 8.0);
        let r = t.reroot(a, 0.9);
        assert_eq!(r.len(), 3);
        assert_eq!(r.horizon(), 9);
        assert_eq!(r.root().action, None);
        assert_eq!(r.node(2).depth, 2);
        assert_eq!(r.root().max_earned_return, 8.0);
    }

    #[test]
    fn audits_report_offending_path() {
        let mut t = SearchTree::new(sv(0.0), 0.0, 50);
        let a = t.add_child(0, av(), sv(1.0), 0.0, 0.9, 1);
        t.node_mut(0).own_volume = 0.5;
        t.node_mut(a).own_volume = 0.5;
        t.node_mut(a).subtree_volume = 0.5;
        t.node_mut(0).subtree_volume = 1.0;
        assert!(t.audit_volumes(1.0, 1e-9).is_ok());
        t.node_mut(a).subtree_volume = 0.4;
        let err = t.audit_volumes(1.0, 1e-9).unwrap_err();
        assert_eq!(err.path, vec![0]);
        t.node_mut(0).subtree_volume = 0.9;
        t.node_mut(0).own_volume = 0.5;
        let err = t.audit_volumes(0.9, 1e-9).unwrap_err();
        assert_eq!(err.path, vec![0, a]);

        t.node_mut(a).expansions = 1;
        t.node_mut(a).visit_count = 1;
        t.node_mut(0).visit_count = 1;
        assert!(t.audit_visits().is_ok());
        t.node_mut(0).visit_count = 3;
        assert_eq!(t.audit_visits().unwrap_err().path, vec![0]);
    }
}
