use alloc::vec::Vec;

use crate::env::BoxBounds;
use crate::math::abs;
use crate::{Error, Result, StateVec};

/// Opaque reference to a node of a [`KdTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KdHandle(u32);

impl KdHandle {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
pub struct KdNode {
    bounds: BoxBounds,
    split: Option<(usize, f64)>,
    point: Option<StateVec>,
    payload: usize,
    value_sum: f64,
    visit_count: u64,
    depth: u32,
    parent: Option<KdHandle>,
    children: Option<[KdHandle; 2]>,
}

impl KdNode {
    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    pub fn volume(&self) -> f64 {
        self.bounds.volume()
    }

    /// `(dimension, coordinate)` of the splitting hyperplane; `None` for leaves.
    pub fn split(&self) -> Option<(usize, f64)> {
        self.split
    }

    /// The stored state; present exactly on leaves.
    pub fn point(&self) -> Option<&StateVec> {
        self.point.as_ref()
    }

    /// Caller-supplied id of the state stored in this leaf.
    pub fn payload(&self) -> usize {
        self.payload
    }

    pub fn value_sum(&self) -> f64 {
        self.value_sum
    }

    pub fn visit_count(&self) -> u64 {
        self.visit_count
    }

    pub fn mean_value(&self) -> f64 {
        self.value_sum / self.visit_count as f64
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn parent(&self) -> Option<KdHandle> {
        self.parent
    }

    pub fn children(&self) -> Option<[KdHandle; 2]> {
        self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// What changed when a point was inserted, so callers can keep volume sums current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsertReport {
    pub handle: KdHandle,
    pub volume: f64,
    pub split: Option<SplitReport>,
}

/// The previously stored point whose leaf was divided by an insert.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitReport {
    pub old_payload: usize,
    /// Leaf that now holds the old point.
    pub old_handle: KdHandle,
    pub old_volume: f64,
    pub new_old_volume: f64,
}

/// How a leaf picks the dimension to split when a second point arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum SplitRule {
    /// Dimension where the two points are furthest apart.
    #[default]
    LargestSeparation,
    /// Dimension where the separation is largest relative to the leaf's side.
    LargestRelativeSeparation,
}

/// Incremental k-d tree; leaves hold one point each and no rebalancing is done.
///
/// Every node carries `value_sum`/`visit_count` over all values inserted or
/// backpropagated at leaves below it.
#[derive(Debug, Clone)]
pub struct KdTree {
    bounds: BoxBounds,
    nodes: Vec<KdNode>,
    n_points: usize,
    rule: SplitRule,
}

impl KdTree {
    pub fn new(bounds: BoxBounds) -> Self {
        Self::with_capacity(bounds, 0)
    }

    pub fn with_capacity(bounds: BoxBounds, points: usize) -> Self {
        KdTree {
            bounds,
            nodes: Vec::with_capacity(2 * points),
            n_points: 0,
            rule: SplitRule::default(),
        }
    }

    pub fn with_rule(mut self, rule: SplitRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn rule(&self) -> SplitRule {
        self.rule
    }

    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn root(&self) -> Option<KdHandle> {
        (!self.nodes.is_empty()).then_some(KdHandle(0))
    }

    pub fn node(&self, h: KdHandle) -> &KdNode {
        &self.nodes[h.index()]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (KdHandle, &KdNode)> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (KdHandle(i as u32), n))
    }

    pub fn leaves(&self) -> impl Iterator<Item = (KdHandle, &KdNode)> {
        self.nodes().filter(|(_, n)| n.is_leaf())
    }

    fn push(&mut self, node: KdNode) -> KdHandle {
        let h = KdHandle(self.nodes.len() as u32);
        self.nodes.push(node);
        h
    }

    /// Inserts `point`. An initial value, when given, counts as one visit at
    /// the new leaf and at every ancestor.
    ///
    /// The owning leaf is split at the midpoint of the new and old points,
    /// along the dimension picked by the tree's [`SplitRule`]. Identical points split the leaf's longest side in half, with
    /// the new point taking the half the old point is not in.
    pub fn insert(
        &mut self,
        point: StateVec,
        initial_value: Option<f64>,
        payload: usize,
    ) -> Result<InsertReport> {
        if !self.bounds.contains(&point) {
            return Err(Error::OutOfBounds);
        }
        if self.nodes.is_empty() {
            let h = self.push(KdNode {
                bounds: self.bounds,
                split: None,
                point: Some(point),
                payload,
                value_sum: initial_value.unwrap_or(0.0),
                visit_count: initial_value.is_some() as u64,
                depth: 0,
                parent: None,
                children: None,
            });
            self.n_points = 1;
            return Ok(InsertReport {
                handle: h,
                volume: self.bounds.volume(),
                split: None,
            });
        }

        let leaf = self.locate_unchecked(&point);
        let (old_point, bounds, depth) = {
            let n = &self.nodes[leaf.index()];
            (n.point.expect("leaf stores a point"), n.bounds, n.depth)
        };

        let mut best_dim = usize::MAX;
        let mut best_sep = 0.0;
        for d in 0..bounds.dim() {
            let sep = match self.rule {
                SplitRule::LargestSeparation => abs(point[d] - old_point[d]),
                SplitRule::LargestRelativeSeparation => {
                    abs(point[d] - old_point[d]) / bounds.side(d)
                }
            };
            if sep > best_sep {
                best_sep = sep;
                best_dim = d;
            }
        }
        let (dim, coord, new_is_right) = if best_dim == usize::MAX {
            let mut longest = 0;
            for d in 1..bounds.dim() {
                if bounds.side(d) > bounds.side(longest) {
                    longest = d;
                }
            }
            let c = 0.5 * (bounds.low[longest] + bounds.high[longest]);
            (longest, c, old_point[longest] < c)
        } else {
            let d = best_dim;
            let mut c = 0.5 * (point[d] + old_point[d]);
            // A leaf created by the duplicate rule does not contain its own
            // point, so the midpoint can fall outside the region.
            if !(c > bounds.low[d] && c < bounds.high[d]) {
                c = 0.5 * (bounds.low[d] + bounds.high[d]);
            }
            (d, c, point[d] >= c)
        };

        let mut left_bounds = bounds;
        left_bounds.high[dim] = coord;
        let mut right_bounds = bounds;
        right_bounds.low[dim] = coord;
        let (new_bounds, old_bounds) = if new_is_right {
            (right_bounds, left_bounds)
        } else {
            (left_bounds, right_bounds)
        };

        let parent = &self.nodes[leaf.index()];
        let old_leaf = KdNode {
            bounds: old_bounds,
            split: None,
            point: Some(old_point),
            payload: parent.payload,
            value_sum: parent.value_sum,
            visit_count: parent.visit_count,
            depth: depth + 1,
            parent: Some(leaf),
            children: None,
        };
        let old_payload = parent.payload;
        let new_leaf = KdNode {
            bounds: new_bounds,
            split: None,
            point: Some(point),
            payload,
            value_sum: initial_value.unwrap_or(0.0),
            visit_count: initial_value.is_some() as u64,
            depth: depth + 1,
            parent: Some(leaf),
            children: None,
        };
        let old_h = self.push(old_leaf);
        let new_h = self.push(new_leaf);
        {
            let p = &mut self.nodes[leaf.index()];
            p.split = Some((dim, coord));
            p.point = None;
            p.children = Some(if new_is_right {
                [old_h, new_h]
            } else {
                [new_h, old_h]
            });
        }
        if let Some(v) = initial_value {
            self.add_to_ancestors(leaf, v);
        }
        self.n_points += 1;

        Ok(InsertReport {
            handle: new_h,
            volume: new_bounds.volume(),
            split: Some(SplitReport {
                old_payload,
                old_handle: old_h,
                old_volume: bounds.volume(),
                new_old_volume: old_bounds.volume(),
            }),
        })
    }

    fn add_to_ancestors(&mut self, from: KdHandle, value: f64) {
        let mut cur = Some(from);
        while let Some(h) = cur {
            let n = &mut self.nodes[h.index()];
            n.value_sum += value;
            n.visit_count += 1;
            cur = n.parent;
        }
    }

    fn locate_unchecked(&self, point: &[f64]) -> KdHandle {
        let mut h = KdHandle(0);
        loop {
            let n = &self.nodes[h.index()];
            match (n.split, n.children) {
                (Some((d, c)), Some([left, right])) => h = if point[d] < c { left } else { right },
                _ => return h,
            }
        }
    }

    /// The leaf whose region contains `state`.
    pub fn locate(&self, state: &StateVec) -> Result<KdHandle> {
        if self.nodes.is_empty() {
            return Err(Error::EmptyTree);
        }
        if !self.bounds.contains(state) {
            return Err(Error::OutOfBounds);
        }
        Ok(self.locate_unchecked(state))
    }

    /// Mean value of the ancestor halfway up from the leaf owning `state`.
    pub fn value(&self, state: &StateVec) -> Result<f64> {
        self.value_at(self.locate(state)?)
    }

    /// Mean value of the ancestor of `leaf` at depth `floor(depth(leaf) / 2)`.
    pub fn value_at(&self, leaf: KdHandle) -> Result<f64> {
        let n = self.node(self.half_depth_ancestor(leaf));
        if n.visit_count == 0 {
            return Err(Error::NoValue);
        }
        Ok(n.mean_value())
    }

    pub fn half_depth_ancestor(&self, leaf: KdHandle) -> KdHandle {
        let target = self.node(leaf).depth / 2;
        let mut h = leaf;
        while self.node(h).depth > target {
            h = self.node(h).parent.expect("non-root node has a parent");
        }
        h
    }

    /// Adds `value` to the leaf owning `state` and to all of its ancestors.
    pub fn backprop(&mut self, value: f64, state: &StateVec) -> Result<()> {
        let h = self.locate(state)?;
        self.add_to_ancestors(h, value);
        Ok(())
    }

    pub fn backprop_at(&mut self, leaf: KdHandle, value: f64) {
        self.add_to_ancestors(leaf, value);
    }

    pub fn leaf_volume(&self, h: KdHandle) -> f64 {
        self.node(h).volume()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> KdTree {
        KdTree::new(BoxBounds::new(&[0.0, 0.0], &[1.0, 1.0]))
    }

    fn s(x: f64, y: f64) -> StateVec {
        StateVec::new(&[x, y])
    }

    #[test]
    fn first_insert_is_single_leaf() {
        let mut t = unit();
        let r = t.insert(s(0.3, 0.3), Some(0.0), 0).unwrap();
        assert_eq!(r.volume, 1.0);
        assert!(r.split.is_none());
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn midpoint_split() {
        let mut t = unit();
        t.insert(s(0.3, 0.3), Some(0.0), 0).unwrap();
        let r = t.insert(s(0.7, 0.3), Some(0.0), 1).unwrap();
        assert_eq!(t.node(t.root().unwrap()).split(), Some((0, 0.5)));
        assert_eq!(r.volume, 0.5);
        let sp = r.split.unwrap();
        assert_eq!(sp.old_payload, 0);
        assert_eq!(sp.old_volume, 1.0);
        assert_eq!(sp.new_old_volume, 0.5);
        assert_eq!(t.node(t.locate(&s(0.3, 0.3)).unwrap()).payload(), 0);
        assert_eq!(t.node(t.locate(&s(0.7, 0.3)).unwrap()).payload(), 1);
    }

    #[test]
    fn split_rules_pick_different_dimensions() {
        // box 4 x 1: a separation of 1.0 in x is 0.25 relative, 0.5 in y is 0.5 relative
        let b = BoxBounds::new(&[0.0, 0.0], &[4.0, 1.0]);
        let mut abs_t = KdTree::new(b);
        let mut rel_t = KdTree::new(b).with_rule(SplitRule::LargestRelativeSeparation);
        for t in [&mut abs_t, &mut rel_t] {
            t.insert(s(1.0, 0.25), Some(0.0), 0).unwrap();
            t.insert(s(2.0, 0.75), Some(0.0), 1).unwrap();
        }
        assert_eq!(abs_t.node(abs_t.root().unwrap()).split(), Some((0, 1.5)));
        assert_eq!(rel_t.node(rel_t.root().unwrap()).split(), Some((1, 0.5)));
    }

    #[test]
    fn duplicate_points_split_longest_side() {
        let mut t = KdTree::new(BoxBounds::new(&[0.0, 0.0], &[1.0, 2.0]));
        t.insert(s(0.3, 0.3), Some(1.0), 0).unwrap();
        let r = t.insert(s(0.3, 0.3), Some(2.0), 1).unwrap();
        assert_eq!(t.node(t.root().unwrap()).split(), Some((1, 1.0)));
        assert_eq!(r.volume, 1.0);
        // the new leaf got the upper half, which does not contain the point
        assert_eq!(t.node(r.handle).bounds().low[1], 1.0);
        let total: f64 = t.leaves().map(|(_, n)| n.volume()).sum();
        assert!((total - 2.0).abs() < 1e-12);
    }

    #[test]
    fn insert_into_duplicate_leaf_keeps_regions_valid() {
        let mut t = unit();
        t.insert(s(0.1, 0.1), Some(0.0), 0).unwrap();
        // duplicate takes the right half, away from its point
        let dup = t.insert(s(0.1, 0.1), Some(0.0), 1).unwrap();
        assert_eq!(t.node(dup.handle).bounds().low[0], 0.5);
        // a point in the right half is located to the duplicate's leaf; the
        // plain midpoint (0.35) lies outside it
        t.insert(s(0.6, 0.1), Some(0.0), 2).unwrap();
        for (_, n) in t.leaves() {
            let b = n.bounds();
            assert!((0..2).all(|d| b.low[d] < b.high[d]), "{b:?}");
        }
        let total: f64 = t.leaves().map(|(_, n)| n.volume()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(t.node(t.locate(&s(0.6, 0.1)).unwrap()).payload(), 2);
    }

    #[test]
    fn out_of_bounds_and_empty() {
        let mut t = unit();
        assert_eq!(t.value(&s(0.5, 0.5)), Err(Error::EmptyTree));
        assert_eq!(t.insert(s(1.5, 0.5), Some(0.0), 0), Err(Error::OutOfBounds));
        t.insert(s(0.5, 0.5), Some(0.0), 0).unwrap();
        assert_eq!(t.locate(&s(-0.1, 0.5)), Err(Error::OutOfBounds));
    }

    #[test]
    fn single_leaf_value_and_backprop() {
        let mut t = unit();
        t.insert(s(0.5, 0.5), Some(3.0), 0).unwrap();
        assert_eq!(t.value(&s(0.1, 0.9)).unwrap(), 3.0);

        let mut t = unit();
        let h = t.insert(s(0.5, 0.5), None, 0).unwrap().handle;
        assert_eq!(t.value(&s(0.5, 0.5)), Err(Error::NoValue));
        t.backprop(2.0, &s(0.5, 0.5)).unwrap();
        t.backprop(2.0, &s(0.5, 0.5)).unwrap();
        assert_eq!(t.node(h).value_sum(), 4.0);
        assert_eq!(t.node(h).visit_count(), 2);
        assert_eq!(t.value(&s(0.5, 0.5)).unwrap(), 2.0);
    }

    #[test]
    fn backprop_is_path_only() {
        let mut t = unit();
        t.insert(s(0.25, 0.5), Some(0.0), 0).unwrap();
        t.insert(s(0.75, 0.5), Some(0.0), 1).unwrap();
        let right = t.locate(&s(0.75, 0.5)).unwrap();
        let before = t.node(right).value_sum();
        t.backprop(1.0, &s(0.25, 0.5)).unwrap();
        assert_eq!(t.node(t.root().unwrap()).value_sum(), 1.0);
        assert_eq!(t.node(right).value_sum(), before);
    }

    #[test]
    fn half_depth_rule() {
        // a chain of inserts along x driving one branch deep
        let mut t = unit();
        let mut x = 0.5;
        t.insert(s(0.999, 0.5), Some(0.0), 0).unwrap();
        for i in 0..6 {
            t.insert(s(x, 0.5), Some(i as f64), i + 1).unwrap();
            x *= 0.5;
        }
        for (h, n) in t.leaves() {
            let a = t.half_depth_ancestor(h);
            assert_eq!(t.node(a).depth(), n.depth() / 2);
        }
        let deep = t.leaves().max_by_key(|(_, n)| n.depth()).unwrap().0;
        assert!(t.node(deep).depth() >= 5);
    }
}
