use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::segments_intersect;
use super::{outcome, BoxBounds, Environment, StepOutcome};
use crate::{ActionVec, Error, Result, StateVec};

/// Probability that a wall outside the spanning tree is knocked down.
pub const LOOP_OPENING_PROBABILITY: f64 = 0.15;

/// Tile coordinates `(column, row)`; tile `(0, 0)` holds the start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tile(pub u32, pub u32);

/// A blocked adjacency between two 4-neighbouring tiles, stored with `.0 < .1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Wall(pub Tile, pub Tile);

impl Wall {
    pub fn new(a: Tile, b: Tile) -> Self {
        if a <= b {
            Wall(a, b)
        } else {
            Wall(b, a)
        }
    }

    fn is_adjacency(&self) -> bool {
        let dx = self.0 .0.abs_diff(self.1 .0);
        let dy = self.0 .1.abs_diff(self.1 .1);
        dx + dy == 1
    }

    /// Endpoints of the wall segment in tile units.
    pub fn segment(&self) -> ([f64; 2], [f64; 2]) {
        let (a, b) = (self.0, self.1);
        if a.1 == b.1 {
            // horizontal neighbours -> vertical wall on x = max column
            let x = a.0.max(b.0) as f64;
            ([x, a.1 as f64], [x, a.1 as f64 + 1.0])
        } else {
            let y = a.1.max(b.1) as f64;
            ([a.0 as f64, y], [a.0 as f64 + 1.0, y])
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MazeSpec {
    pub size_n: usize,
    pub seed: u64,
    pub tile_side: f64,
    pub walls: Vec<Wall>,
    pub goal_center: StateVec,
    pub goal_radius: f64,
}

impl MazeSpec {
    /// A maze with the canonical start/goal layout and the given walls.
    pub fn with_walls(size_n: usize, seed: u64, mut walls: Vec<Wall>) -> Self {
        walls.sort();
        walls.dedup();
        let tile_side = 1.0;
        let c = (size_n as f64 - 0.5) * tile_side;
        MazeSpec {
            size_n,
            seed,
            tile_side,
            walls,
            goal_center: StateVec::new(&[c, c]),
            goal_radius: 0.5 * tile_side,
        }
    }

    pub fn start_position(&self) -> [f64; 2] {
        [0.5 * self.tile_side, 0.5 * self.tile_side]
    }

    pub fn start_tile(&self) -> Tile {
        Tile(0, 0)
    }

    pub fn goal_tile(&self) -> Tile {
        let g = (self.size_n - 1) as u32;
        Tile(g, g)
    }

    pub fn extent(&self) -> f64 {
        self.size_n as f64 * self.tile_side
    }

    /// Checks sizes, wall validity and start-goal connectivity.
    pub fn validate(&self) -> Result<()> {
        if self.size_n < 2 {
            return Err(Error::InvalidArgument("maze size must be at least 2"));
        }
        if !(self.tile_side > 0.0 && self.tile_side.is_finite()) {
            return Err(Error::InvalidArgument("tile side must be positive"));
        }
        if !(self.goal_radius > 0.0) || self.goal_center.dim() != 2 {
            return Err(Error::InvalidArgument(
                "goal must be a 2-d disc with positive radius",
            ));
        }
        let n = self.size_n as u32;
        for w in &self.walls {
            if !w.is_adjacency() || w.0 .0 >= n || w.0 .1 >= n || w.1 .0 >= n || w.1 .1 >= n {
                return Err(Error::InvalidArgument(
                    "wall does not join two neighbouring tiles",
                ));
            }
        }
        if !WallGrid::new(self).connected(self.start_tile(), self.goal_tile()) {
            return Err(Error::InvalidArgument(
                "walls disconnect the start tile from the goal tile",
            ));
        }
        Ok(())
    }

    pub fn in_goal(&self, x: f64, y: f64) -> bool {
        let dx = x - self.goal_center[0];
        let dy = y - self.goal_center[1];
        dx * dx + dy * dy <= self.goal_radius * self.goal_radius
    }
}

/// Dense lookup of walls for segment collision queries.
#[derive(Debug, Clone)]
pub struct WallGrid {
    n: usize,
    // vertical[k * n + j]: wall on line x = k spanning row j (k in 1..n)
    vertical: Vec<bool>,
    // horizontal[k * n + i]: wall on line y = k spanning column i (k in 1..n)
    horizontal: Vec<bool>,
}

impl WallGrid {
    pub fn new(spec: &MazeSpec) -> Self {
        let n = spec.size_n;
        let mut vertical = vec![false; (n + 1) * n];
        let mut horizontal = vec![false; (n + 1) * n];
        for w in &spec.walls {
            let (a, b) = (w.0, w.1);
            if a.1 == b.1 {
                let k = a.0.max(b.0) as usize;
                vertical[k * n + a.1 as usize] = true;
            } else {
                let k = a.1.max(b.1) as usize;
                horizontal[k * n + a.0 as usize] = true;
            }
        }
        WallGrid {
            n,
            vertical,
            horizontal,
        }
    }

    fn blocked_between(&self, a: Tile, b: Tile) -> bool {
        let n = self.n;
        if a.1 == b.1 {
            self.vertical[a.0.max(b.0) as usize * n + a.1 as usize]
        } else {
            self.horizontal[a.1.max(b.1) as usize * n + a.0 as usize]
        }
    }

    pub fn neighbours(&self, t: Tile) -> impl Iterator<Item = Tile> + '_ {
        let n = self.n as u32;
        let cands = [
            (t.0 + 1 < n).then(|| Tile(t.0 + 1, t.1)),
            (t.0 > 0).then(|| Tile(t.0 - 1, t.1)),
            (t.1 + 1 < n).then(|| Tile(t.0, t.1 + 1)),
            (t.1 > 0).then(|| Tile(t.0, t.1 - 1)),
        ];
        cands
            .into_iter()
            .flatten()
            .filter(move |&m| !self.blocked_between(t, m))
    }

    pub fn connected(&self, from: Tile, to: Tile) -> bool {
        let n = self.n;
        let mut seen = vec![false; n * n];
        let mut stack = vec![from];
        seen[from.1 as usize * n + from.0 as usize] = true;
        while let Some(t) = stack.pop() {
            if t == to {
                return true;
            }
            for m in self.neighbours(t) {
                let idx = m.1 as usize * n + m.0 as usize;
                if !seen[idx] {
                    seen[idx] = true;
                    stack.push(m);
                }
            }
        }
        false
    }

    /// Whether the closed segment `p -> q` (tile units) touches any interior wall.
    pub fn segment_blocked(&self, p: [f64; 2], q: [f64; 2]) -> bool {
        let n = self.n;
        let (x_lo, x_hi) = (p[0].min(q[0]), p[0].max(q[0]));
        let (y_lo, y_hi) = (p[1].min(q[1]), p[1].max(q[1]));
        let row_range = |lo: f64, hi: f64| {
            let a = (libm::floor(lo) as i64 - 1).max(0) as usize;
            let b = (libm::floor(hi) as i64).clamp(0, n as i64 - 1) as usize;
            a..=b
        };
        let k_lo = (libm::ceil(x_lo) as i64).max(1) as usize;
        let k_hi = (libm::floor(x_hi) as i64).min(n as i64 - 1);
        if k_hi >= k_lo as i64 {
            for k in k_lo..=k_hi as usize {
                for j in row_range(y_lo, y_hi) {
                    if self.vertical[k * n + j]
                        && segments_intersect(
                            p,
                            q,
                            [k as f64, j as f64],
                            [k as f64, j as f64 + 1.0],
                        )
                    {
                        return true;
                    }
                }
            }
        }
        let k_lo = (libm::ceil(y_lo) as i64).max(1) as usize;
        let k_hi = (libm::floor(y_hi) as i64).min(n as i64 - 1);
        if k_hi >= k_lo as i64 {
            for k in k_lo..=k_hi as usize {
                for i in row_range(x_lo, x_hi) {
                    if self.horizontal[k * n + i]
                        && segments_intersect(
                            p,
                            q,
                            [i as f64, k as f64],
                            [i as f64 + 1.0, k as f64],
                        )
                    {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Builds a seeded maze: randomized depth-first spanning tree over the tile
/// grid, then each remaining wall is removed independently with probability
/// [`LOOP_OPENING_PROBABILITY`].
pub fn generate_maze(size_n: usize, seed: u64) -> Result<MazeSpec> {
    if size_n < 2 {
        return Err(Error::InvalidArgument("maze size must be at least 2"));
    }
    let n = size_n as u32;
    let idx = |t: Tile| (t.1 * n + t.0) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut visited = vec![false; size_n * size_n];
    let mut tree_edges: Vec<Wall> = Vec::with_capacity(size_n * size_n);
    let mut stack = vec![Tile(0, 0)];
    visited[0] = true;
    while let Some(&t) = stack.last() {
        let mut options = [Tile(0, 0); 4];
        let mut k = 0;
        for m in [
            (t.0 + 1 < n).then(|| Tile(t.0 + 1, t.1)),
            (t.0 > 0).then(|| Tile(t.0 - 1, t.1)),
            (t.1 + 1 < n).then(|| Tile(t.0, t.1 + 1)),
            (t.1 > 0).then(|| Tile(t.0, t.1 - 1)),
        ]
        .into_iter()
        .flatten()
        {
            if !visited[idx(m)] {
                options[k] = m;
                k += 1;
            }
        }
        if k == 0 {
            stack.pop();
            continue;
        }
        let next = options[rng.random_range(0..k)];
        visited[idx(next)] = true;
        tree_edges.push(Wall::new(t, next));
        stack.push(next);
    }
    tree_edges.sort();

    let mut walls = Vec::new();
    for y in 0..n {
        for x in 0..n {
            for other in [
                (x + 1 < n).then(|| Tile(x + 1, y)),
                (y + 1 < n).then(|| Tile(x, y + 1)),
            ]
            .into_iter()
            .flatten()
            {
                let w = Wall::new(Tile(x, y), other);
                if tree_edges.binary_search(&w).is_ok() {
                    continue;
                }
                if rng.random::<f64>() >= LOOP_OPENING_PROBABILITY {
                    walls.push(w);
                }
            }
        }
    }
    Ok(MazeSpec::with_walls(size_n, seed, walls))
}

/// Maze with geometric dynamics `s' = s + v_max * a`, `v_max` = one tile side.
#[derive(Debug, Clone)]
pub struct GeometricMaze {
    spec: MazeSpec,
    grid: WallGrid,
    bounds: BoxBounds,
}

impl GeometricMaze {
    pub fn new(spec: MazeSpec) -> Result<Self> {
        spec.validate()?;
        let grid = WallGrid::new(&spec);
        let e = spec.extent();
        let bounds = BoxBounds::new(&[0.0, 0.0], &[e, e]);
        Ok(GeometricMaze { spec, grid, bounds })
    }

    pub fn spec(&self) -> &MazeSpec {
        &self.spec
    }

    pub fn v_max(&self) -> f64 {
        self.spec.tile_side
    }

    /// Whether moving in a straight line `p -> q` (world units) hits a wall or leaves the maze.
    pub fn segment_blocked(&self, p: [f64; 2], q: [f64; 2]) -> bool {
        if !self.bounds.contains(&q) {
            return true;
        }
        let s = self.spec.tile_side;
        self.grid
            .segment_blocked([p[0] / s, p[1] / s], [q[0] / s, q[1] / s])
    }
}

impl Environment for GeometricMaze {
    fn name(&self) -> &'static str {
        "geometric"
    }

    fn state_dim(&self) -> usize {
        2
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    fn start_state(&self) -> StateVec {
        StateVec::new(&self.spec.start_position())
    }

    fn reward(&self, state: &StateVec) -> f64 {
        if self.spec.in_goal(state[0], state[1]) {
            1.0
        } else {
            0.0
        }
    }

    fn step(&self, state: &StateVec, action: &ActionVec) -> StepOutcome {
        let v = self.v_max();
        let p = [state[0], state[1]];
        let q = [p[0] + v * action[0], p[1] + v * action[1]];
        let next = if self.segment_blocked(p, q) {
            *state
        } else {
            StateVec::new(&q)
        };
        outcome(self, next)
    }

    fn size(&self) -> usize {
        self.spec.size_n
    }
}
