use crate::math::abs;
use crate::{Error, Result};

use super::policy::Move;

/// Absolute tolerance on `g(alpha) - 1`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const MAX_SOLVER_ITERATIONS: usize = 200;

/// One candidate move at a search node.
///
/// `weight * q` is the move's value term: `weight` is the discount-and-reach
/// factor `gamma^depth * P(node reached)`, `q` the estimated value of the
/// move's landing state. `volume` is the STAY move's own region volume or a
/// child's subtree volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveScore {
    pub id: Move,
    pub q: f64,
    pub volume: f64,
    pub weight: f64,
}

impl MoveScore {
    pub fn new(id: Move, q: f64, volume: f64, weight: f64) -> Self {
        MoveScore {
            id,
            q,
            volume,
            weight,
        }
    }

    pub fn value_term(&self) -> f64 {
        self.weight * self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationResult {
    pub alpha: f64,
    /// `alpha - max(weight * q)`; kept separately because forming it from
    /// `alpha` loses precision when the distribution is nearly greedy.
    pub gap: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Finds the unique `alpha > max(w q)` with `sum lambda v / (alpha - w q) = 1`.
///
/// Works on the gap `t = alpha - max(w q)`. `g(t)` is convex and strictly
/// decreasing, so Newton's method started from the left end of the bracket
/// `[max(lambda V - spread, lambda V_top), lambda V]` approaches the root
/// monotonically; a bisection step is taken whenever Newton leaves the bracket.
pub fn solve_alpha(scores: &[MoveScore], lambda: f64) -> Result<NormalizationResult> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("at least one move is required"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument("lambda must be positive and finite"));
    }
    let mut x_max = f64::NEG_INFINITY;
    let mut x_min = f64::INFINITY;
    let mut total = 0.0;
    for s in scores {
        let x = s.value_term();
        if !x.is_finite() {
            return Err(Error::InvalidArgument("move value is not finite"));
        }
        if !(s.volume > 0.0 && s.volume.is_finite()) {
            return Err(Error::InvalidArgument(
                "move volume must be positive and finite",
            ));
        }
        x_max = x_max.max(x);
        x_min = x_min.min(x);
        total += s.volume;
    }
    let top: f64 = scores
        .iter()
        .filter(|s| s.value_term() == x_max)
        .map(|s| s.volume)
        .sum();

    let g = |t: f64| -> (f64, f64) {
        let mut val = 0.0;
        let mut deriv = 0.0;
        for s in scores {
            let denom = t + (x_max - s.value_term());
            let term = lambda * s.volume / denom;
            val += term;
            deriv -= term / denom;
        }
        (val - 1.0, deriv)
    };

    let mut lo = (lambda * total - (x_max - x_min)).max(lambda * top);
    let mut hi = lambda * total;
    if lo > hi {
        lo = hi;
    }
    // rounding can put the analytic bracket ends on the wrong side of the root
    let mut widen = 0;
    while g(lo).0 < 0.0 {
        lo *= 0.5;
        widen += 1;
        if widen > MAX_SOLVER_ITERATIONS || lo == 0.0 {
            return Err(Error::SolverFailed {
                iterations: widen,
                residual: g(lo).0,
            });
        }
    }
    while g(hi).0 > 0.0 {
        hi *= 2.0;
        widen += 1;
        if widen > MAX_SOLVER_ITERATIONS {
            return Err(Error::SolverFailed {
                iterations: widen,
                residual: g(hi).0,
            });
        }
    }

    let mut t = lo;
    let mut best = (f64::INFINITY, t);
    for it in 0..MAX_SOLVER_ITERATIONS {
        let (f, df) = g(t);
        if abs(f) < best.0 {
            best = (abs(f), t);
        }
        if abs(f) <= RESIDUAL_TOLERANCE {
            return Ok(NormalizationResult {
                alpha: x_max + t,
                gap: t,
                residual: abs(f),
                iterations: it + 1,
            });
        }
        if f > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - f / df;
        t = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    // bracket collapsed to adjacent floats: accept the best point if it is within tolerance
    if best.0 <= RESIDUAL_TOLERANCE {
        return Ok(NormalizationResult {
            alpha: x_max + best.1,
            gap: best.1,
            residual: best.0,
            iterations: MAX_SOLVER_ITERATIONS,
        });
    }
    Err(Error::SolverFailed {
        iterations: MAX_SOLVER_ITERATIONS,
        residual: best.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(i: usize, q: f64, v: f64) -> MoveScore {
        MoveScore::new(
            if i == 0 {
                Move::Stay
            } else {
                Move::Child(i - 1)
            },
            q,
            v,
            1.0,
        )
    }

    #[test]
    fn single_move_closed_form() {
        let r = solve_alpha(&[mv(0, 0.0, 1.0)], 1.0).unwrap();
        assert!((r.alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_pair() {
        let r = solve_alpha(&[mv(0, 0.0, 0.5), mv(1, 0.0, 0.5)], 1.0).unwrap();
        assert!((r.alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_instance() {
        // 0.5/a + 0.5/(a - 10) = 1  =>  a^2 - 11a + 5 = 0
        let r = solve_alpha(&[mv(0, 0.0, 0.5), mv(1, 10.0, 0.5)], 1.0).unwrap();
        let exact = (11.0 + libm::sqrt(101.0)) / 2.0;
        assert!((r.alpha - exact).abs() < 1e-10, "{} vs {}", r.alpha, exact);
        assert!(r.residual <= RESIDUAL_TOLERANCE);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_alpha(&[], 1.0).is_err());
        assert!(solve_alpha(&[mv(0, f64::NAN, 1.0)], 1.0).is_err());
        assert!(solve_alpha(&[mv(0, f64::INFINITY, 1.0)], 1.0).is_err());
        assert!(solve_alpha(&[mv(0, 0.0, 0.0)], 1.0).is_err());
        assert!(solve_alpha(&[mv(0, 0.0, 1.0)], 0.0).is_err());
        assert!(solve_alpha(&[mv(0, 0.0, 1.0)], f64::NAN).is_err());
    }

    #[test]
    fn nearly_greedy_instance_converges() {
        let scores = [
            mv(0, 0.0, 0.3),
            mv(1, 19.9, 0.01),
            mv(2, 19.9 - 1e-7, 0.5),
            mv(3, 3.0, 0.19),
        ];
        let r = solve_alpha(&scores, 1e-6).unwrap();
        assert!(r.gap > 0.0);
        assert!(r.residual <= RESIDUAL_TOLERANCE);
    }
}
