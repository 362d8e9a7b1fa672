//! Spatial density estimation over visited states.
//!
//! [`KdTree`] partitions the state box into axis-aligned leaf regions that
//! each own exactly one stored state. A leaf's volume is the associated
//! volume of its state under the partition density estimator, and the
//! value statistics kept on every k-d node give a cheap nonparametric
//! value estimate.

mod kdtree;
mod voronoi;

pub use kdtree::{InsertReport, KdHandle, KdNode, KdTree, SplitReport, SplitRule};
pub use voronoi::voronoi_volumes_mc;
