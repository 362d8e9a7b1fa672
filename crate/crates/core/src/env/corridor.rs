use super::{outcome, BoxBounds, Environment, StepOutcome};
use crate::{ActionVec, StateVec};

/// Obstacle-free rectangle `[0, length] x [0, width]` with geometric
/// dynamics `s' = s + v_max * a`. Used to check exploration-speed bounds
/// along a straight line.
#[derive(Debug, Clone)]
pub struct Corridor {
    bounds: BoxBounds,
    start: StateVec,
    goal_center: StateVec,
    goal_radius: f64,
    v_max: f64,
}

impl Corridor {
    pub fn new(
        length: f64,
        width: f64,
        start: [f64; 2],
        goal_center: [f64; 2],
        goal_radius: f64,
        v_max: f64,
    ) -> Self {
        let bounds = BoxBounds::new(&[0.0, 0.0], &[length, width]);
        assert!(bounds.contains(&start) && bounds.contains(&goal_center));
        Corridor {
            bounds,
            start: StateVec::new(&start),
            goal_center: StateVec::new(&goal_center),
            goal_radius,
            v_max,
        }
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }
}

impl Environment for Corridor {
    fn name(&self) -> &'static str {
        "corridor"
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
        self.start
    }

    fn reward(&self, state: &StateVec) -> f64 {
        if state.distance_sq(&self.goal_center) <= self.goal_radius * self.goal_radius {
            1.0
        } else {
            0.0
        }
    }

    fn step(&self, state: &StateVec, action: &ActionVec) -> StepOutcome {
        let q = [
            state[0] + self.v_max * action[0],
            state[1] + self.v_max * action[1],
        ];
        let next = if self.bounds.contains(&q) {
            StateVec::new(&q)
        } else {
            *state
        };
        outcome(self, next)
    }
}
