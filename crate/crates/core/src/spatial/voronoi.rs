use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::BoxBounds;
use crate::StateVec;

/// Monte Carlo estimate of the Voronoi-cell volume of each point inside `bounds`.
///
/// Draws `n_samples` uniform states, assigns each to its nearest point
/// (Euclidean, lowest index on ties) and scales the counts by the box volume.
pub fn voronoi_volumes_mc(
    points: &[StateVec],
    bounds: &BoxBounds,
    n_samples: usize,
    seed: u64,
) -> Vec<f64> {
    assert!(!points.is_empty(), "need at least one point");
    let mut counts = vec![0usize; points.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = bounds.dim();
    let mut sample = StateVec::zeros(dim);
    for _ in 0..n_samples {
        for d in 0..dim {
            sample[d] = rng.random_range(bounds.low[d]..bounds.high[d]);
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in points.iter().enumerate() {
            let d = p.distance_sq(&sample);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        counts[best] += 1;
    }
    let vol = bounds.volume();
    counts
        .iter()
        .map(|&c| vol * c as f64 / n_samples.max(1) as f64)
        .collect()
}
