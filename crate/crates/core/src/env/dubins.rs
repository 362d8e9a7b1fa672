use core::f64::consts::PI;

use super::maze::{MazeSpec, WallGrid};
use super::{outcome, BoxBounds, Environment, StepOutcome};
use crate::math::{cos, sin, wrap_angle};
use crate::{ActionVec, Result, StateVec};

/// Maximum turning rate (radians per unit time) at full steering.
pub const DUBINS_MAX_STEERING: f64 = PI / 2.0;
/// Fixed RK4 substeps per unit-time transition.
pub const DUBINS_SUBSTEPS: usize = 10;

/// Maze with Dubins-car dynamics over state `(x, y, heading)`.
///
/// `dx/dt = a0 v cos(theta)`, `dy/dt = a0 v sin(theta)`, `dtheta/dt = a1 phi_max`,
/// integrated over unit time. A collision at any substep freezes the car.
#[derive(Debug, Clone)]
pub struct DubinsMaze {
    spec: MazeSpec,
    grid: WallGrid,
    bounds: BoxBounds,
}

impl DubinsMaze {
    pub fn new(spec: MazeSpec) -> Result<Self> {
        spec.validate()?;
        let grid = WallGrid::new(&spec);
        let e = spec.extent();
        let bounds = BoxBounds::new(&[0.0, 0.0, -PI], &[e, e, PI]);
        Ok(DubinsMaze { spec, grid, bounds })
    }

    pub fn spec(&self) -> &MazeSpec {
        &self.spec
    }

    pub fn v_max(&self) -> f64 {
        self.spec.tile_side
    }

    /// Integrates the car without collision checks; returns the final
    /// `(x, y, theta)` with the heading left unwrapped.
    pub fn integrate(&self, state: [f64; 3], action: [f64; 2]) -> [f64; 3] {
        let mut s = state;
        let h = 1.0 / DUBINS_SUBSTEPS as f64;
        for _ in 0..DUBINS_SUBSTEPS {
            s = self.rk4(s, action, h);
        }
        s
    }

    fn deriv(&self, s: [f64; 3], a: [f64; 2]) -> [f64; 3] {
        let v = a[0] * self.v_max();
        [v * cos(s[2]), v * sin(s[2]), a[1] * DUBINS_MAX_STEERING]
    }

    fn rk4(&self, s: [f64; 3], a: [f64; 2], h: f64) -> [f64; 3] {
        let add =
            |s: [f64; 3], k: [f64; 3], f: f64| [s[0] + f * k[0], s[1] + f * k[1], s[2] + f * k[2]];
        let k1 = self.deriv(s, a);
        let k2 = self.deriv(add(s, k1, h / 2.0), a);
        let k3 = self.deriv(add(s, k2, h / 2.0), a);
        let k4 = self.deriv(add(s, k3, h), a);
        let mut out = s;
        for i in 0..3 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    }

    fn blocked(&self, p: [f64; 2], q: [f64; 2]) -> bool {
        let e = self.spec.extent();
        if !(q[0] >= 0.0 && q[0] <= e && q[1] >= 0.0 && q[1] <= e) {
            return true;
        }
        let t = self.spec.tile_side;
        self.grid
            .segment_blocked([p[0] / t, p[1] / t], [q[0] / t, q[1] / t])
    }
}

impl Environment for DubinsMaze {
    fn name(&self) -> &'static str {
        "dubins"
    }

    fn state_dim(&self) -> usize {
        3
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    fn start_state(&self) -> StateVec {
        let p = self.spec.start_position();
        StateVec::new(&[p[0], p[1], 0.0])
    }

    fn reward(&self, state: &StateVec) -> f64 {
        if self.spec.in_goal(state[0], state[1]) {
            1.0
        } else {
            0.0
        }
    }

    fn step(&self, state: &StateVec, action: &ActionVec) -> StepOutcome {
        let a = [action[0], action[1]];
        let h = 1.0 / DUBINS_SUBSTEPS as f64;
        let mut s = [state[0], state[1], state[2]];
        for _ in 0..DUBINS_SUBSTEPS {
            let next = self.rk4(s, a, h);
            if self.blocked([s[0], s[1]], [next[0], next[1]]) {
                return outcome(self, *state);
            }
            s = next;
        }
        outcome(self, StateVec::new(&[s[0], s[1], wrap_angle(s[2])]))
    }

    fn size(&self) -> usize {
        self.spec.size_n
    }
}
