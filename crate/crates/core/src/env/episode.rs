use alloc::vec::Vec;

use super::{Environment, StepOutcome};
use crate::math::powi;
use crate::{ActionVec, Error, Result, StateVec};

/// Runs `policy` for at most `horizon` steps from the start state.
///
/// On goal arrival at (0-based) step `t` the episode stops and that step's
/// outcome carries `steps_remaining_bonus = horizon - t - 1`, one unit of
/// reward for every step left in the episode.
pub fn rollout_episode<F>(
    env: &(impl Environment + ?Sized),
    mut policy: F,
    horizon: usize,
) -> Result<Vec<StepOutcome>>
where
    F: FnMut(usize, &StateVec) -> ActionVec,
{
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1"));
    }
    let mut state = env.start_state();
    let mut outcomes = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let action = policy(t, &state);
        if action.dim() != env.action_dim() || !action.is_normalized() {
            return Err(Error::InvalidArgument(
                "policy produced an action outside [-1, 1]^d",
            ));
        }
        let mut out = env.step(&state, &action);
        if out.terminal {
            out.steps_remaining_bonus = (horizon - t - 1) as f64;
            outcomes.push(out);
            break;
        }
        state = out.next_state;
        outcomes.push(out);
    }
    Ok(outcomes)
}

/// Aggregate returns of one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    /// Sum of rewards plus the remaining-steps bonus; the number reported in tables.
    pub undiscounted: f64,
    /// `sum_t gamma^t r_t`, where the bonus is paid as one unit per remaining step.
    pub discounted: f64,
    /// 0-based step at which the goal was reached.
    pub goal_step: Option<usize>,
}

impl EpisodeSummary {
    pub fn from_outcomes(outcomes: &[StepOutcome], gamma: f64) -> Self {
        let mut undiscounted = 0.0;
        let mut discounted = 0.0;
        let mut goal_step = None;
        for (t, o) in outcomes.iter().enumerate() {
            undiscounted += o.reward + o.steps_remaining_bonus;
            discounted += powi(gamma, t as i32) * o.reward;
            let remaining = o.steps_remaining_bonus as usize;
            for k in 1..=remaining {
                discounted += powi(gamma, (t + k) as i32);
            }
            if o.terminal && goal_step.is_none() {
                goal_step = Some(t);
            }
        }
        EpisodeSummary {
            undiscounted,
            discounted,
            goal_step,
        }
    }

    pub fn success(&self) -> bool {
        self.goal_step.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{GeometricMaze, MazeSpec};
    use alloc::vec;

    fn open3() -> GeometricMaze {
        GeometricMaze::new(MazeSpec::with_walls(3, 0, vec![])).unwrap()
    }

    #[test]
    fn goal_at_step_one_returns_49() {
        let env = open3();
        // (0.5,0.5) -> (1.5,1.5) -> (2.5,2.5): goal at 0-based step 1
        let out = rollout_episode(&env, |_, _| ActionVec::new(&[1.0, 1.0]), 50).unwrap();
        let s = EpisodeSummary::from_outcomes(&out, 0.95);
        assert_eq!(s.goal_step, Some(1));
        assert_eq!(s.undiscounted, 49.0);
        assert_eq!(crate::planner::earned_return(2, 50), 49.0);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn never_reaching_goal_returns_zero() {
        let env = open3();
        let out = rollout_episode(&env, |_, _| ActionVec::new(&[0.0, 0.0]), 50).unwrap();
        let s = EpisodeSummary::from_outcomes(&out, 0.95);
        assert_eq!(s.undiscounted, 0.0);
        assert_eq!(s.discounted, 0.0);
        assert!(!s.success());
        assert_eq!(out.len(), 50);
    }

    #[test]
    fn goal_at_final_step_returns_one() {
        let env = open3();
        let out = rollout_episode(
            &env,
            |t, _| {
                if t >= 8 {
                    ActionVec::new(&[1.0, 1.0])
                } else {
                    ActionVec::new(&[0.0, 0.0])
                }
            },
            10,
        )
        .unwrap();
        let s = EpisodeSummary::from_outcomes(&out, 0.95);
        assert_eq!(s.goal_step, Some(9));
        assert_eq!(s.undiscounted, 1.0);
        assert!((s.discounted - libm::pow(0.95, 9.0)).abs() < 1e-15);
    }

    #[test]
    fn discounted_bonus() {
        let env = open3();
        let out = rollout_episode(&env, |_, _| ActionVec::new(&[1.0, 1.0]), 5).unwrap();
        let s = EpisodeSummary::from_outcomes(&out, 0.5);
        // reward at t = 1, bonus for t = 2, 3, 4
        let expected = 0.5 + 0.25 + 0.125 + 0.0625;
        assert!((s.discounted - expected).abs() < 1e-15);
        assert_eq!(s.undiscounted, 4.0);
    }

    #[test]
    fn malformed_action_is_rejected() {
        let env = open3();
        assert!(rollout_episode(&env, |_, _| ActionVec::new(&[2.0, 0.0]), 5).is_err());
        assert!(rollout_episode(&env, |_, _| ActionVec::new(&[0.0]), 5).is_err());
        assert!(rollout_episode(&env, |_, _| ActionVec::new(&[f64::NAN, 0.0]), 5).is_err());
        assert!(rollout_episode(&env, |_, _| ActionVec::new(&[0.0, 0.0]), 0).is_err());
    }
}
