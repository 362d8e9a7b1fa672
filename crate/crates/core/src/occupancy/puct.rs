use crate::math::sqrt;

/// `q + c * prior * sqrt(n_parent) / n_action`; unvisited actions score `+inf`.
pub fn puct_score(q: f64, prior: f64, n_parent: u64, n_action: u64, c: f64) -> f64 {
    if n_action == 0 {
        return f64::INFINITY;
    }
    q + c * prior * sqrt(n_parent as f64) / n_action as f64
}
