//! Empirical check of the high-probability exploration bound.
//!
//! The zero-reward search expands a node of a delta-ball on a straight
//! trajectory with probability at least `1/2 |B| min(1, c(1-gamma)/sqrt(t))`
//! per step, and from there reaches the next ball with probability at
//! least `sigma delta^dA`. Summing over `i` balls gives
//!
//! ```text
//! P(ball i reached within N) >= P(Gamma(i, 1) <= C (sqrt N - c(1-gamma)))
//! C = 1/2 |B_{delta/5}| sigma delta^dA c (1-gamma)
//! ```
//!
//! Since the median of `Gamma(i, 1)` is below `i`, the probability is above
//! one half once `C (sqrt N - c(1-gamma)) >= i`, i.e. at
//!
//! ```text
//! N* = c^2 (1-gamma)^2 (2 i / (|B| sigma delta^dA c^2 (1-gamma)^2) + 1)^2
//! ```

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;
use vmcts_core::env::Corridor;
use vmcts_core::planner::{Algorithm, PlannerConfig, UntrainedModels, VolumeSearch};

use crate::error::{HarnessError, Result};

/// Geometric-dynamics corridor: start at `(0.5, 0.5)`, trajectory states
/// spaced `hop` apart along the x axis, the target ball around state `i - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorridorLayout {
    pub hop: f64,
    pub width: f64,
    pub v_max: f64,
}

impl Default for CorridorLayout {
    fn default() -> Self {
        CorridorLayout {
            hop: 0.5,
            width: 1.0,
            v_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplorationBoundParams {
    pub delta: f64,
    pub sigma: f64,
    pub d_a: u32,
    /// Trajectory states counted from the start, which is state 1.
    pub hops: u32,
    pub gamma: f64,
    pub c: f64,
    /// `|B_{delta/5}|` as a fraction of the state-space volume.
    pub ball_volume: f64,
}

impl ExplorationBoundParams {
    /// Parameters for `layout` with the largest delta the action box allows.
    ///
    /// From any point of the ball around `s_k`, the actions landing in the
    /// ball around `s_{k+1}` form a disc of radius `delta / v_max` in the
    /// action box `[-1, 1]^2`; it stays inside the box when
    /// `hop + 2 delta <= v_max`. Under uniform sampling its probability is
    /// `pi delta^2 / (4 v_max^2)`, so `sigma = pi / (4 v_max^2)`.
    pub fn corridor(hops: u32, layout: CorridorLayout, planner: &PlannerConfig) -> Self {
        let delta = ((layout.v_max - layout.hop) / 2.0).min(layout.width / 2.0);
        let area = corridor_length(hops, layout) * layout.width;
        ExplorationBoundParams {
            delta,
            sigma: PI / (4.0 * layout.v_max * layout.v_max),
            d_a: 2,
            hops,
            gamma: planner.gamma,
            c: planner.c,
            ball_volume: PI * (delta / 5.0).powi(2) / area,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.delta, self.sigma, self.gamma, self.c, self.ball_volume]
            .iter()
            .all(|&x| x > 0.0)
            && self.d_a > 0
            && self.hops > 0;
        if !all_positive || self.gamma >= 1.0 {
            return Err(HarnessError::Config(
                "exploration-bound parameters must be positive with gamma < 1".into(),
            ));
        }
        Ok(())
    }

    /// `|B| sigma delta^dA`: per-step probability scale of one hop.
    pub fn hop_mass(&self) -> f64 {
        self.ball_volume * self.sigma * self.delta.powi(self.d_a as i32)
    }

    fn warmup(&self) -> f64 {
        self.c * (1.0 - self.gamma)
    }

    /// Lower bound on the probability of reaching the target within `n` expansions.
    pub fn lower_bound(&self, n: f64) -> f64 {
        let x = 0.5 * self.hop_mass() * self.warmup() * (n.sqrt() - self.warmup());
        if x <= 0.0 {
            0.0
        } else {
            gamma_lr(self.hops as f64, x)
        }
    }

    /// Expansions after which the target is reached with probability above one half.
    pub fn budget(&self) -> f64 {
        let k = self.warmup();
        k * k * (2.0 * self.hops as f64 / (self.hop_mass() * k * k) + 1.0).powi(2)
    }

    /// The closed form with `1/2 i |B| sigma delta^dA` in place of
    /// `2 i / (|B| sigma delta^dA c^2 (1-gamma)^2)`; kept for reporting.
    pub fn budget_as_printed(&self) -> f64 {
        let k = self.warmup();
        k * k * (0.5 * self.hops as f64 * self.hop_mass() + 1.0).powi(2)
    }
}

fn corridor_length(hops: u32, layout: CorridorLayout) -> f64 {
    1.0 + layout.hop * (hops.saturating_sub(1)) as f64
}

pub fn corridor(hops: u32, layout: CorridorLayout, delta: f64) -> Corridor {
    let target = 0.5 + layout.hop * (hops.saturating_sub(1)) as f64;
    Corridor::new(
        corridor_length(hops, layout),
        layout.width,
        [0.5, 0.5],
        [target, 0.5],
        delta,
        layout.v_max,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub params: ExplorationBoundParams,
    pub layout: CorridorLayout,
    pub n_star: f64,
    pub n_star_as_printed: f64,
    pub lower_bound_at_n_star: f64,
    /// Searches stop here; unreached seeds count as failures at every budget.
    pub iteration_cap: u64,
    pub seeds: Vec<u64>,
    /// Expansions until the target ball was first reached, per seed.
    pub expansions: Vec<Option<u64>>,
    pub success_at_n_star: f64,
    pub success_at_double_n_star: f64,
    pub success_at_printed: f64,
    /// At least half the seeds reach the target within `n_star`, and doubling the budget does not lower that.
    pub passed: bool,
    /// The same check at `n_star_as_printed`.
    pub passed_as_printed: bool,
}

impl BoundReport {
    pub fn success_within(&self, budget: f64) -> f64 {
        if self.expansions.is_empty() {
            return 0.0;
        }
        let hits = self
            .expansions
            .iter()
            .filter(|e| e.is_some_and(|n| n as f64 <= budget))
            .count();
        hits as f64 / self.expansions.len() as f64
    }
}

/// Zero-reward searches on the corridor, one per seed, each stopped when
/// the target ball is reached or after `iteration_cap` expansions.
pub fn run_exploration_bound_check(
    hops: u32,
    layout: CorridorLayout,
    seeds: &[u64],
    iteration_cap: u64,
    planner: &PlannerConfig,
) -> Result<BoundReport> {
    let params = ExplorationBoundParams::corridor(hops, layout, planner);
    params.validate()?;
    let env = corridor(hops, layout, params.delta);
    let models = UntrainedModels::new(2);
    let n_star = params.budget();
    let cap = iteration_cap.min(n_star.ceil() as u64 * 2);
    let expansions = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = PlannerConfig {
                algorithm: Algorithm::VolumeRrtAblation,
                seed,
                rollouts: 4096,
                horizon: planner.horizon.max(hops as usize * 4),
                ..*planner
            };
            let mut search = VolumeSearch::new(&env, &models, &cfg)?;
            Ok(search.run_until_goal(cap)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = BoundReport {
        params,
        layout,
        n_star,
        n_star_as_printed: params.budget_as_printed(),
        lower_bound_at_n_star: params.lower_bound(n_star),
        iteration_cap: cap,
        seeds: seeds.to_vec(),
        expansions,
        success_at_n_star: 0.0,
        success_at_double_n_star: 0.0,
        success_at_printed: 0.0,
        passed: false,
        passed_as_printed: false,
    };
    report.success_at_n_star = report.success_within(n_star);
    report.success_at_double_n_star = report.success_within(2.0 * n_star);
    report.success_at_printed = report.success_within(report.n_star_as_printed);
    report.passed = report.success_at_n_star >= 0.5
        && report.success_at_double_n_star >= report.success_at_n_star;
    Ok(report)
}
