//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vmcts_core::env::{MazeSpec, Tile, WallGrid};

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// `sum_n d(n) V(n) + lambda * sum_n Vol(n) ln d(n)`; `-inf` off the open simplex.
pub fn occupancy_objective(d: &[f64], values: &[f64], vols: &[f64], lambda: f64) -> f64 {
    let mut f = 0.0;
    for i in 0..d.len() {
        if d[i] <= 0.0 {
            return f64::NEG_INFINITY;
        }
        f += d[i] * values[i] + lambda * vols[i] * d[i].ln();
    }
    f
}

/// Projection of `y` onto the simplex in the metric `sum_i h_i (x_i - y_i)^2`:
/// `x_i = max(0, y_i - theta / h_i)` with `theta` found by bisection.
pub fn project_simplex_scaled(y: &[f64], h: &[f64]) -> Vec<f64> {
    let mass = |theta: f64| {
        y.iter()
            .zip(h)
            .map(|(v, w)| (v - theta / w).max(0.0))
            .sum::<f64>()
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    while mass(lo) < 1.0 {
        lo *= 2.0;
    }
    while mass(hi) > 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    y.iter()
        .zip(h)
        .map(|(v, w)| (v - theta / w).max(0.0))
        .collect()
}

/// Maximizes [`occupancy_objective`] over the simplex by projected gradient
/// ascent, with the gradient and the projection scaled by the (diagonal)
/// curvature and an Armijo backtracking step.
pub fn projected_gradient_occupancy(
    values: &[f64],
    vols: &[f64],
    lambda: f64,
    tol: f64,
) -> Vec<f64> {
    let n = values.len();
    let f = |d: &[f64]| occupancy_objective(d, values, vols, lambda);
    let total: f64 = vols.iter().sum();
    let mut x: Vec<f64> = vols.iter().map(|v| v / total).collect();
    let mut fx = f(&x);
    for _ in 0..10_000 {
        let g: Vec<f64> = (0..n)
            .map(|i| values[i] + lambda * vols[i] / x[i])
            .collect();
        let h: Vec<f64> = (0..n).map(|i| lambda * vols[i] / (x[i] * x[i])).collect();
        let mut step = 1.0;
        let next = loop {
            let y: Vec<f64> = (0..n).map(|i| x[i] + step * g[i] / h[i]).collect();
            let p = project_simplex_scaled(&y, &h);
            let fp = f(&p);
            let lin: f64 = (0..n).map(|i| g[i] * (p[i] - x[i])).sum();
            if fp.is_finite() && fp >= fx + 1e-4 * lin - 1e-15 * fx.abs().max(1.0) {
                break Some((p, fp));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((p, fp)) = next else { break };
        let moved = p
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = p;
        fx = fp;
        if moved < tol {
            break;
        }
    }
    x
}

/// Root of `sum lambda Vol / (alpha - V) = 1` by plain bisection.
pub fn bisect_alpha(values: &[f64], vols: &[f64], lambda: f64) -> f64 {
    let vmax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = vols.iter().sum();
    let g = |a: f64| {
        values
            .iter()
            .zip(vols)
            .map(|(v, w)| lambda * w / (a - v))
            .sum::<f64>()
            - 1.0
    };
    let (mut lo, mut hi) = (vmax, vmax + lambda * total + 1.0);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Rooted tree with a value and an own volume per node; volumes sum to 1.
#[derive(Debug, Clone)]
pub struct RandomTree {
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub values: Vec<f64>,
    pub vols: Vec<f64>,
}

impl RandomTree {
    pub fn generate(seed: u64, max_nodes: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=max_nodes);
        let mut parent = vec![None];
        let mut children = vec![Vec::new()];
        for i in 1..n {
            let p = rng.random_range(0..i);
            parent.push(Some(p));
            children.push(Vec::new());
            children[p].push(i);
        }
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..20.0)).collect();
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        RandomTree {
            parent,
            children,
            values,
            vols: raw.iter().map(|v| v / total).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Nodes of the subtree rooted at `n`, including `n`.
    pub fn subtree(&self, n: usize) -> Vec<usize> {
        let mut out = vec![n];
        let mut i = 0;
        while i < out.len() {
            out.extend(&self.children[out[i]]);
            i += 1;
        }
        out
    }
}

/// Tile-graph shortest path length (in tile moves) from start to goal.
pub fn maze_bfs(spec: &MazeSpec) -> Option<usize> {
    let n = spec.size_n as u32;
    let grid = WallGrid::new(spec);
    let start = spec.start_tile();
    let goal = spec.goal_tile();
    let mut dist = vec![usize::MAX; (n * n) as usize];
    let idx = |t: Tile| (t.1 * n + t.0) as usize;
    dist[idx(start)] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        if t == goal {
            return Some(dist[idx(t)]);
        }
        let here = dist[idx(t)];
        let mut next = Vec::new();
        if t.0 > 0 {
            next.push(Tile(t.0 - 1, t.1));
        }
        if t.0 + 1 < n {
            next.push(Tile(t.0 + 1, t.1));
        }
        if t.1 > 0 {
            next.push(Tile(t.0, t.1 - 1));
        }
        if t.1 + 1 < n {
            next.push(Tile(t.0, t.1 + 1));
        }
        for u in next {
            let (a, b) = (tile_center(t), tile_center(u));
            if !grid.segment_blocked(a, b) && dist[idx(u)] == usize::MAX {
                dist[idx(u)] = here + 1;
                queue.push_back(u);
            }
        }
    }
    None
}

pub fn tile_center(t: Tile) -> [f64; 2] {
    [t.0 as f64 + 0.5, t.1 as f64 + 0.5]
}

/// Voronoi cell areas on `[0, 1]^2` by rasterizing a `res x res` grid of cell centres.
pub fn voronoi_grid(points: &[[f64; 2]], res: usize) -> Vec<f64> {
    let mut counts = vec![0usize; points.len()];
    for i in 0..res {
        for j in 0..res {
            let x = (i as f64 + 0.5) / res as f64;
            let y = (j as f64 + 0.5) / res as f64;
            let best = (0..points.len())
                .min_by(|&a, &b| {
                    let da = (points[a][0] - x).powi(2) + (points[a][1] - y).powi(2);
                    let db = (points[b][0] - x).powi(2) + (points[b][1] - y).powi(2);
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            counts[best] += 1;
        }
    }
    counts
        .iter()
        .map(|&c| c as f64 / (res * res) as f64)
        .collect()
}
