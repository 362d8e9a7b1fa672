//! The invariant suite behind `vmcts props`.
//!
//! Each property draws its cases from the suite seed and reports a pass
//! flag, a case count and, on failure, a JSON counterexample. The
//! reference solvers here are written independently of the library code
//! they check.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use vmcts_core::env::{generate_maze, BoxBounds, Corridor, DubinsMaze, Environment, GeometricMaze};
use vmcts_core::learn::{
    loss_and_grads, GaussianPolicy, LossCoefficients, Mlp, Nets, TrainBatch, TrainSample,
};
use vmcts_core::occupancy::{
    direct_occupancy, solve_alpha, tree_policy, Move, MoveScore, RESIDUAL_TOLERANCE,
};
use vmcts_core::planner::{
    run_episode, Algorithm, PlannerConfig, PlannerRng, SearchTree, UntrainedModels, VolumeSearch,
};
use vmcts_core::spatial::{KdTree, SplitRule};
use vmcts_core::StateVec;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Deliberate defects for checking that the suite notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Audited search trees get one node's subtree volume inflated.
    VolumeAccounting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    pub ms: u64,
    /// Largest error or smallest p-value seen, where meaningful.
    pub worst: Option<f64>,
    pub counterexample: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropsReport {
    pub schema_version: u32,
    pub seed: u64,
    pub fault: Option<Fault>,
    pub passed: bool,
    pub properties: Vec<PropertyResult>,
}

impl PropsReport {
    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

struct Check {
    cases: u64,
    worst: Option<f64>,
    failure: Option<Value>,
}

impl Check {
    fn new() -> Self {
        Check {
            cases: 0,
            worst: None,
            failure: None,
        }
    }

    fn max_worst(&mut self, x: f64) {
        self.worst = Some(self.worst.map_or(x, |w| w.max(x)));
    }

    fn min_worst(&mut self, x: f64) {
        self.worst = Some(self.worst.map_or(x, |w| w.min(x)));
    }

    fn fail(&mut self, v: Value) {
        if self.failure.is_none() {
            self.failure = Some(v);
        }
    }
}

fn timed(name: &str, f: impl FnOnce() -> Check) -> PropertyResult {
    let t = Instant::now();
    let c = f();
    PropertyResult {
        name: name.into(),
        passed: c.failure.is_none(),
        cases: c.cases,
        ms: t.elapsed().as_millis() as u64,
        worst: c.worst,
        counterexample: c.failure,
    }
}

pub fn run_property_suite(seed: u64, fault: Option<Fault>) -> PropsReport {
    let properties = vec![
        path_product_oracle(seed, 100),
        projected_gradient_oracle(seed, 100),
        alpha_closed_form(),
        alpha_bracket_and_residual(seed, 10_000),
        spatial_invariants(seed, 200),
        tree_accounting(seed, 8, 150, fault),
        rrt_limit(seed),
        seed_determinism(seed),
        gradient_check(seed),
    ];
    PropsReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed,
        fault,
        passed: properties.iter().all(|p| p.passed),
        properties,
    }
}

/// Random rooted tree with node values and own volumes summing to one.
#[derive(Debug, Clone, Serialize)]
pub struct RandomTree {
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub values: Vec<f64>,
    pub vols: Vec<f64>,
}

impl RandomTree {
    pub fn generate(rng: &mut impl Rng, max_nodes: usize) -> Self {
        let n = rng.random_range(1..=max_nodes);
        let mut parent = vec![None];
        let mut children = vec![Vec::new()];
        for i in 1..n {
            let p = rng.random_range(0..i);
            parent.push(Some(p));
            children.push(Vec::new());
            children[p].push(i);
        }
        let values = (0..n).map(|_| rng.random_range(-5.0..20.0)).collect();
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        RandomTree {
            parent,
            children,
            values,
            vols: raw.iter().map(|v| v / total).collect(),
        }
    }

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

/// Root of `sum lambda vol / (alpha - v) = 1` by bisection.
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

/// Stop probabilities from composing per-node tree policies top-down.
pub fn compose_tree_policies(t: &RandomTree, lambda: f64) -> Vec<f64> {
    let n = t.values.len();
    let alpha = bisect_alpha(&t.values, &t.vols, lambda);
    let subtrees: Vec<Vec<usize>> = (0..n).map(|i| t.subtree(i)).collect();
    let mass: Vec<f64> = subtrees
        .iter()
        .map(|s| {
            s.iter()
                .map(|&m| lambda * t.vols[m] / (alpha - t.values[m]))
                .sum()
        })
        .collect();
    let sub_vol: Vec<f64> = subtrees
        .iter()
        .map(|s| s.iter().map(|&m| t.vols[m]).sum())
        .collect();
    let mut stop = vec![0.0; n];
    let mut stack = vec![(0usize, 1.0f64)];
    while let Some((id, w)) = stack.pop() {
        let mut scores = vec![MoveScore::new(Move::Stay, t.values[id], t.vols[id], w)];
        for (j, &c) in t.children[id].iter().enumerate() {
            // the value at which a subtree's volume carries its optimal mass
            scores.push(MoveScore::new(
                Move::Child(j),
                alpha - lambda * sub_vol[c] / mass[c],
                sub_vol[c],
                w,
            ));
        }
        let dist = tree_policy(&scores, lambda).expect("valid scores");
        stop[id] = w * dist.probs[0];
        for (j, &c) in t.children[id].iter().enumerate() {
            stack.push((c, w * dist.probs[j + 1]));
        }
    }
    stop
}

fn tree_lambda(k: usize) -> f64 {
    [0.05, 0.5, 3.0, 20.0][k % 4]
}

pub fn path_product_oracle(seed: u64, trees: usize) -> PropertyResult {
    timed("occupancy/path-product-oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0cc0);
        let mut c = Check::new();
        for k in 0..trees {
            let t = RandomTree::generate(&mut rng, 50);
            let lambda = tree_lambda(k);
            let nodes: Vec<(f64, f64)> = t
                .values
                .iter()
                .cloned()
                .zip(t.vols.iter().cloned())
                .collect();
            let direct = direct_occupancy(&nodes, lambda).expect("valid tree");
            let composed = compose_tree_policies(&t, lambda);
            let tv = 0.5
                * direct
                    .iter()
                    .zip(&composed)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>();
            c.cases += 1;
            c.max_worst(tv);
            if tv > 1e-8 {
                c.fail(json!({ "tree": t, "lambda": lambda, "tv": tv }));
            }
        }
        c
    })
}

fn objective(d: &[f64], values: &[f64], vols: &[f64], lambda: f64) -> f64 {
    let mut f = 0.0;
    for i in 0..d.len() {
        if d[i] <= 0.0 {
            return f64::NEG_INFINITY;
        }
        f += d[i] * values[i] + lambda * vols[i] * d[i].ln();
    }
    f
}

/// Simplex projection in the metric `sum h_i (x_i - y_i)^2`.
fn project_scaled(y: &[f64], h: &[f64]) -> Vec<f64> {
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

/// Diagonally scaled projected gradient ascent with Armijo backtracking on
/// `sum d V + lambda sum Vol ln d` over the simplex.
pub fn projected_gradient_occupancy(
    values: &[f64],
    vols: &[f64],
    lambda: f64,
    tol: f64,
) -> Vec<f64> {
    let n = values.len();
    let total: f64 = vols.iter().sum();
    let mut x: Vec<f64> = vols.iter().map(|v| v / total).collect();
    let mut fx = objective(&x, values, vols, lambda);
    for _ in 0..10_000 {
        let g: Vec<f64> = (0..n)
            .map(|i| values[i] + lambda * vols[i] / x[i])
            .collect();
        let h: Vec<f64> = (0..n).map(|i| lambda * vols[i] / (x[i] * x[i])).collect();
        let mut step = 1.0;
        let next = loop {
            let y: Vec<f64> = (0..n).map(|i| x[i] + step * g[i] / h[i]).collect();
            let p = project_scaled(&y, &h);
            let fp = objective(&p, values, vols, lambda);
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

pub fn projected_gradient_oracle(seed: u64, trees: usize) -> PropertyResult {
    timed("occupancy/projected-gradient-oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9a9a);
        let mut c = Check::new();
        for k in 0..trees {
            let t = RandomTree::generate(&mut rng, 50);
            let lambda = [0.2, 1.0, 5.0][k % 3];
            let values: Vec<f64> = t.values.iter().map(|v| v / 10.0).collect();
            let nodes: Vec<(f64, f64)> =
                values.iter().cloned().zip(t.vols.iter().cloned()).collect();
            let direct = direct_occupancy(&nodes, lambda).expect("valid tree");
            let pg = projected_gradient_occupancy(&values, &t.vols, lambda, 1e-13);
            let err = direct
                .iter()
                .zip(&pg)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            c.cases += 1;
            c.max_worst(err);
            if err > 1e-6 {
                c.fail(json!({ "values": values, "vols": t.vols, "lambda": lambda, "max_abs_diff": err }));
            }
        }
        c
    })
}

pub fn alpha_closed_form() -> PropertyResult {
    timed("occupancy/alpha-closed-form", || {
        let mut c = Check::new();
        let scores = [
            MoveScore::new(Move::Stay, 0.0, 0.5, 1.0),
            MoveScore::new(Move::Child(0), 10.0, 0.5, 1.0),
        ];
        let exact = (11.0 + 101f64.sqrt()) / 2.0;
        c.cases = 1;
        match solve_alpha(&scores, 1.0) {
            Ok(r) => {
                let err = (r.alpha - exact).abs();
                c.max_worst(err);
                if err > 1e-10 {
                    c.fail(json!({ "alpha": r.alpha, "exact": exact }));
                }
            }
            Err(e) => c.fail(json!({ "error": e.to_string() })),
        }
        c
    })
}

pub fn alpha_bracket_and_residual(seed: u64, cases: usize) -> PropertyResult {
    timed("occupancy/alpha-bracket-residual", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa1fa);
        let mut c = Check::new();
        for _ in 0..cases {
            let n = rng.random_range(1..12);
            let lambda = 10f64.powf(rng.random_range(-6.0..2.0));
            let scores: Vec<MoveScore> = (0..n)
                .map(|i| {
                    MoveScore::new(
                        Move::Child(i),
                        rng.random_range(-50.0..50.0),
                        rng.random_range(1e-4..1.0),
                        rng.random_range(0.01..1.0),
                    )
                })
                .collect();
            c.cases += 1;
            let dump = || {
                json!({
                    "lambda": lambda,
                    "moves": scores.iter().map(|s| [s.q, s.volume, s.weight]).collect::<Vec<_>>(),
                })
            };
            let r = match solve_alpha(&scores, lambda) {
                Ok(r) => r,
                Err(e) => {
                    c.fail(json!({ "instance": dump(), "error": e.to_string() }));
                    continue;
                }
            };
            let x: Vec<f64> = scores.iter().map(|s| s.value_term()).collect();
            let x_max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let x_min = x.iter().cloned().fold(f64::INFINITY, f64::min);
            let total: f64 = scores.iter().map(|s| s.volume).sum();
            let slack = 1e-9 * r.alpha.abs().max(1.0);
            let bracketed = r.gap > 0.0
                && r.alpha >= (x_min + lambda * total).max(x_max) - slack
                && r.alpha <= x_max + lambda * total + slack;
            let g: f64 = x
                .iter()
                .zip(&scores)
                .map(|(xi, s)| lambda * s.volume / (r.gap + (x_max - xi)))
                .sum();
            let residual = (g - 1.0).abs();
            c.max_worst(residual);
            if !bracketed || residual > RESIDUAL_TOLERANCE {
                c.fail(json!({ "instance": dump(), "alpha": r.alpha, "residual": residual, "bracketed": bracketed }));
            }
        }
        c
    })
}

/// Random interleavings of inserts and backprops in 1 to 3 dimensions,
/// checking volume conservation, interior aggregates and the half-depth
/// value rule after every operation.
pub fn spatial_invariants(seed: u64, sequences: usize) -> PropertyResult {
    timed("spatial/kd-invariants", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bad);
        let mut c = Check::new();
        for k in 0..sequences {
            let dim = rng.random_range(1..=3);
            let sides: Vec<f64> = (0..dim).map(|_| rng.random_range(0.2..5.0)).collect();
            let rule = if k % 2 == 0 {
                SplitRule::LargestSeparation
            } else {
                SplitRule::LargestRelativeSeparation
            };
            let bounds = BoxBounds::new(&vec![0.0; dim], &sides);
            let total = bounds.volume();
            let mut kd = KdTree::new(bounds).with_rule(rule);
            let mut points: Vec<StateVec> = Vec::new();
            let mut log: Vec<Value> = Vec::new();
            for _ in 0..rng.random_range(1..120) {
                c.cases += 1;
                if points.is_empty() || rng.random_bool(0.75) {
                    let p: Vec<f64> = sides
                        .iter()
                        .map(|s| {
                            let u = if rng.random_bool(0.3) {
                                rng.random_range(0..=4) as f64 / 4.0
                            } else {
                                rng.random()
                            };
                            u * s
                        })
                        .collect();
                    let v = rng.random_bool(0.8).then(|| rng.random_range(-10.0..10.0));
                    log.push(json!({ "insert": p, "value": v }));
                    let sv = StateVec::new(&p);
                    if let Err(e) = kd.insert(sv, v, points.len()) {
                        c.fail(json!({ "ops": log, "error": e.to_string() }));
                        break;
                    }
                    points.push(sv);
                } else {
                    let i = rng.random_range(0..points.len());
                    let v = rng.random_range(-10.0..10.0);
                    log.push(json!({ "backprop": points[i].to_vec(), "value": v }));
                    kd.backprop(v, &points[i])
                        .expect("point inside the root box");
                }
                if let Some(msg) = kd_violation(&kd, total, &points) {
                    c.fail(json!({ "sides": sides, "rule": rule, "ops": log, "violation": msg }));
                    break;
                }
            }
        }
        c
    })
}

fn kd_violation(kd: &KdTree, total: f64, points: &[StateVec]) -> Option<String> {
    let sum: f64 = kd.leaves().map(|(_, n)| n.volume()).sum();
    if (sum - total).abs() > 1e-9 * total {
        return Some(format!("leaf volumes sum to {sum}, root box has {total}"));
    }
    if kd.leaves().count() != points.len() {
        return Some("leaf count differs from insert count".into());
    }
    for (h, n) in kd.nodes() {
        if let Some([a, b]) = n.children() {
            let (na, nb) = (kd.node(a), kd.node(b));
            let s = na.value_sum() + nb.value_sum();
            if (n.value_sum() - s).abs() > 1e-9 * (1.0 + n.value_sum().abs()) {
                return Some(format!(
                    "value sum of node {} is not its children's",
                    h.index()
                ));
            }
            if n.visit_count() != na.visit_count() + nb.visit_count() {
                return Some(format!(
                    "visit count of node {} is not its children's",
                    h.index()
                ));
            }
        }
    }
    for p in points {
        let leaf = kd.locate(p).ok()?;
        let anc = kd.half_depth_ancestor(leaf);
        if kd.node(anc).depth() != kd.node(leaf).depth() / 2 {
            return Some("half-depth ancestor at the wrong depth".into());
        }
        let n = kd.node(anc);
        let ok = match kd.value(p) {
            Ok(v) => v == n.value_sum() / n.visit_count() as f64,
            Err(_) => n.visit_count() == 0,
        };
        if !ok {
            return Some(format!(
                "value at {:?} is not its half-depth ancestor's mean",
                p.to_vec()
            ));
        }
    }
    None
}

fn audit(tree: &SearchTree, total: f64, fault: Option<Fault>) -> Result<(), Value> {
    let mut faulty;
    let tree = match fault {
        Some(Fault::VolumeAccounting) if tree.len() >= 4 => {
            faulty = tree.clone();
            let id = tree.len() - 1;
            faulty.node_mut(id).subtree_volume += 1e-3 * total;
            &faulty
        }
        _ => tree,
    };
    if let Err(f) = tree.audit_volumes(total, 1e-9) {
        return Err(
            json!({ "invariant": "subtree volume", "path": f.path, "expected": f.expected, "found": f.found }),
        );
    }
    if let Err(f) = tree.audit_visits() {
        return Err(
            json!({ "invariant": "visit count", "path": f.path, "expected": f.expected, "found": f.found }),
        );
    }
    Ok(())
}

/// Volume-MCTS and ablation searches on random mazes, auditing subtree
/// volumes and visit counts after every iteration.
pub fn tree_accounting(
    seed: u64,
    searches: usize,
    iterations: usize,
    fault: Option<Fault>,
) -> PropertyResult {
    timed("planner/tree-accounting", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x74ee);
        let mut c = Check::new();
        for k in 0..searches {
            let size = rng.random_range(2..5);
            let maze_seed = rng.random_range(0..10_000);
            let spec = generate_maze(size, maze_seed).expect("generator succeeds");
            let env: Box<dyn Environment> = if k % 2 == 0 {
                Box::new(GeometricMaze::new(spec).expect("valid maze"))
            } else {
                Box::new(DubinsMaze::new(spec).expect("valid maze"))
            };
            let algorithm = if k % 3 == 2 {
                Algorithm::VolumeRrtAblation
            } else {
                Algorithm::VolumeMcts
            };
            let cfg = PlannerConfig {
                seed: k as u64,
                ..PlannerConfig::with_algorithm(algorithm)
            };
            let models = UntrainedModels::new(env.action_dim());
            let mut search = VolumeSearch::new(env.as_ref(), &models, &cfg).expect("valid config");
            let total = search.total_volume();
            for it in 0..iterations {
                search.iterate().expect("search step");
                c.cases += 1;
                if let Err(mut v) = audit(search.tree(), total, fault) {
                    v["env"] = json!(env.name());
                    v["size"] = json!(size);
                    v["maze_seed"] = json!(maze_seed);
                    v["algorithm"] = json!(algorithm.name());
                    v["iteration"] = json!(it + 1);
                    c.fail(v);
                    return c;
                }
            }
        }
        c
    })
}

/// With zero values the descent stops in each k-d region with probability
/// proportional to its volume; chi-square over 20 regions and 10^4 draws.
pub fn rrt_limit(seed: u64) -> PropertyResult {
    timed("planner/rrt-limit", || {
        let mut c = Check::new();
        let env = Corridor::new(10.0, 2.0, [0.5, 1.0], [9.5, 1.0], 0.5, 1.0);
        let models = UntrainedModels::new(2);
        let cfg = PlannerConfig {
            seed,
            ..PlannerConfig::with_algorithm(Algorithm::VolumeRrtAblation)
        };
        let mut search = VolumeSearch::new(&env, &models, &cfg).expect("valid config");
        while search.kd().len() < 20 {
            search.iterate().expect("search step");
        }
        let tree = search.tree();
        let regions: Vec<usize> = (0..tree.len())
            .filter(|&i| tree.node(i).kd_leaf.is_some())
            .collect();
        let total: f64 = regions.iter().map(|&i| tree.node(i).own_volume).sum();
        let mut counts = vec![0u64; tree.len()];
        let mut rng = PlannerRng::seed_from_u64(seed ^ 0x5eed);
        let draws = 10_000u64;
        for _ in 0..draws {
            let d = search
                .descend_with(search.lambda(), &mut rng)
                .expect("descent");
            counts[*d.path.last().expect("non-empty path")] += 1;
        }
        let mut stat = 0.0;
        for &i in &regions {
            let expected = draws as f64 * tree.node(i).own_volume / total;
            stat += (counts[i] as f64 - expected).powi(2) / expected;
        }
        let p = 1.0
            - ChiSquared::new((regions.len() - 1) as f64)
                .expect("positive dof")
                .cdf(stat);
        c.cases = draws;
        c.min_worst(p);
        if p <= 0.01 || regions.len() != 20 {
            c.fail(json!({
                "regions": regions.len(),
                "chi_square": stat,
                "p": p,
                "counts": regions.iter().map(|&i| counts[i]).collect::<Vec<_>>(),
                "volumes": regions.iter().map(|&i| tree.node(i).own_volume).collect::<Vec<_>>(),
            }));
        }
        c
    })
}

pub fn seed_determinism(seed: u64) -> PropertyResult {
    timed("planner/seed-determinism", || {
        let mut c = Check::new();
        let env = GeometricMaze::new(generate_maze(3, seed).expect("generator succeeds"))
            .expect("valid maze");
        let models = UntrainedModels::new(2);
        for algorithm in Algorithm::ALL {
            let cfg = PlannerConfig {
                seed,
                rollouts: 300,
                ..PlannerConfig::with_algorithm(algorithm)
            };
            let a = run_episode(&env, &models, &cfg).expect("episode");
            let b = run_episode(&env, &models, &cfg).expect("episode");
            c.cases += 1;
            if a.record != b.record || a.actions != b.actions || a.node_values != b.node_values {
                c.fail(
                    json!({ "algorithm": algorithm.name(), "first": a.record.undiscounted_return,
                               "second": b.record.undiscounted_return }),
                );
            }
        }
        c
    })
}

/// Central differences against the analytic loss gradient on small nets,
/// for the full loss and for each of its three terms alone.
pub fn gradient_check(seed: u64) -> PropertyResult {
    timed("learn/gradient-check", || {
        let mut c = Check::new();
        let heads = [
            LossCoefficients::default(),
            LossCoefficients {
                value: 1.0,
                kl: 0.0,
                advantage: 0.0,
            },
            LossCoefficients {
                value: 0.0,
                kl: 10.0,
                advantage: 0.0,
            },
            LossCoefficients {
                value: 0.0,
                kl: 0.0,
                advantage: 1.0,
            },
        ];
        for (k, coefficients) in heads.into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let action_dim = 1 + k % 2;
            let mut nets = Nets {
                value: Mlp::new(&[2, 5, 4, 1], &mut rng),
                policy: GaussianPolicy::new(Mlp::new(&[2, 5, 2 * action_dim], &mut rng))
                    .expect("even output"),
            };
            // log-stddevs well inside the clamp keep the loss smooth
            for p in nets.policy.net_mut().params_mut() {
                *p *= 0.3;
            }
            let data: Vec<TrainSample> = (0..5)
                .map(|_| TrainSample {
                    state: vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
                    value_target: rng.random_range(-3.0..3.0),
                    actions: (0..rng.random_range(1..4))
                        .map(|_| {
                            let a = (0..action_dim)
                                .map(|_| rng.random_range(-1.0..1.0))
                                .collect();
                            (a, rng.random_range(-2.0..2.0))
                        })
                        .collect(),
                })
                .collect();
            let refs: Vec<&TrainSample> = data.iter().collect();
            let batch = TrainBatch {
                samples: &refs,
                coefficients,
                lambda: 0.7,
            };
            let (_, grads) = loss_and_grads(&nets, &batch).expect("finite loss");
            let loss = |n: &Nets| loss_and_grads(n, &batch).expect("finite loss").0;
            let eps = 1e-5;
            let check = |fd: f64, g: f64, which: &str, i: usize, c: &mut Check| {
                c.cases += 1;
                let scale = fd.abs().max(g.abs());
                let err = if scale > 1e-7 {
                    (fd - g).abs() / scale
                } else {
                    0.0
                };
                c.max_worst(err);
                if err >= 1e-4 || (scale <= 1e-7 && (fd - g).abs() > 1e-9) {
                    c.fail(json!({ "case": k, "net": which, "param": i, "finite_difference": fd, "analytic": g }));
                }
            };
            for i in 0..nets.value.param_count() {
                let p = nets.value.params()[i];
                nets.value.params_mut()[i] = p + eps;
                let up = loss(&nets);
                nets.value.params_mut()[i] = p - eps;
                let down = loss(&nets);
                nets.value.params_mut()[i] = p;
                check(
                    (up - down) / (2.0 * eps),
                    grads.value[i],
                    "value",
                    i,
                    &mut c,
                );
            }
            for i in 0..nets.policy.net().param_count() {
                let p = nets.policy.net().params()[i];
                nets.policy.net_mut().params_mut()[i] = p + eps;
                let up = loss(&nets);
                nets.policy.net_mut().params_mut()[i] = p - eps;
                let down = loss(&nets);
                nets.policy.net_mut().params_mut()[i] = p;
                check(
                    (up - down) / (2.0 * eps),
                    grads.policy[i],
                    "policy",
                    i,
                    &mut c,
                );
            }
        }
        c
    })
}
