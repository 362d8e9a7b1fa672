mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use vmcts_core::env::{generate_maze, Corridor, DubinsMaze, Environment, GeometricMaze};
use vmcts_core::planner::{
    run_episode, Algorithm, PlannerConfig, PlannerRng, SearchTree, UntrainedModels, VolumeSearch,
};

fn check_tree(tree: &SearchTree, total: f64) -> Result<(), TestCaseError> {
    if let Err(f) = tree.audit_volumes(total, 1e-9) {
        return Err(TestCaseError::fail(format!(
            "volume audit failed at {:?}",
            f.path
        )));
    }
    if let Err(f) = tree.audit_visits() {
        return Err(TestCaseError::fail(format!(
            "visit audit failed at {:?}",
            f.path
        )));
    }
    Ok(())
}

#[test]
fn zero_value_descents_follow_region_volumes() {
    let env = Corridor::new(10.0, 2.0, [0.5, 1.0], [9.5, 1.0], 0.5, 1.0);
    let models = UntrainedModels::new(2);
    let cfg = PlannerConfig {
        seed: 4,
        ..PlannerConfig::with_algorithm(Algorithm::VolumeRrtAblation)
    };
    let mut search = VolumeSearch::new(&env, &models, &cfg).unwrap();
    while search.kd().len() < 20 {
        search.iterate().unwrap();
    }
    let regions: Vec<usize> = (0..search.tree().len())
        .filter(|&i| search.tree().node(i).kd_leaf.is_some())
        .collect();
    assert_eq!(regions.len(), 20);
    let total: f64 = regions
        .iter()
        .map(|&i| search.tree().node(i).own_volume)
        .sum();
    assert!((total - 20.0).abs() < 1e-9);

    let mut counts = vec![0u64; search.tree().len()];
    let mut rng = PlannerRng::seed_from_u64(99);
    let draws = 10_000;
    for _ in 0..draws {
        let d = search.descend_with(search.lambda(), &mut rng).unwrap();
        counts[*d.path.last().unwrap()] += 1;
    }
    let mut stat = 0.0;
    for &i in &regions {
        let expected = draws as f64 * search.tree().node(i).own_volume / total;
        stat += (counts[i] as f64 - expected).powi(2) / expected;
    }
    let outside: u64 = (0..counts.len())
        .filter(|i| !regions.contains(i))
        .map(|i| counts[i])
        .sum();
    assert_eq!(outside, 0);
    let p = 1.0 - ChiSquared::new(19.0).unwrap().cdf(stat);
    assert!(p > 0.01, "chi-square {stat:.2}, p = {p:.4}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn volume_search_bookkeeping_holds_every_iteration(
        size in 2usize..5,
        maze_seed in 0u64..1000,
        seed in 0u64..1000,
        dubins in any::<bool>(),
        ablation in any::<bool>(),
        merge in any::<bool>(),
    ) {
        let spec = generate_maze(size, maze_seed).unwrap();
        let geo;
        let dub;
        let env: &dyn Environment = if dubins {
            dub = DubinsMaze::new(spec).unwrap();
            &dub
        } else {
            geo = GeometricMaze::new(spec).unwrap();
            &geo
        };
        let algorithm = if ablation { Algorithm::VolumeRrtAblation } else { Algorithm::VolumeMcts };
        let cfg = PlannerConfig { seed, merge_duplicate_states: merge, ..PlannerConfig::with_algorithm(algorithm) };
        let models = UntrainedModels::new(env.action_dim());
        let mut search = VolumeSearch::new(env, &models, &cfg).unwrap();
        let total = env.bounds().volume();
        for _ in 0..150 {
            search.iterate().unwrap();
            check_tree(search.tree(), total)?;
        }
        let kd = search.kd();
        let leaf_sum: f64 = kd.leaves().map(|(_, n)| n.volume()).sum();
        prop_assert!((leaf_sum - total).abs() <= 1e-9 * total);
        // every kd leaf belongs to exactly one search node, which points back at it
        for (h, leaf) in kd.leaves() {
            let n = search.tree().node(leaf.payload());
            prop_assert_eq!(n.kd_leaf, Some(h));
            prop_assert!((n.own_volume - leaf.volume()).abs() <= 1e-12 * total);
        }
    }

    #[test]
    fn generated_mazes_are_solvable(size in 2usize..9, seed in 0u64..100_000) {
        let spec = generate_maze(size, seed).unwrap();
        let d = common::maze_bfs(&spec);
        prop_assert!(d.is_some());
        prop_assert!(d.unwrap() >= 2 * (size - 1));
    }
}

#[test]
fn returns_respect_the_shortest_tile_path() {
    // a step moves at most one tile boundary per axis, so it shortens the
    // tile path by at most two
    for seed in 0..6 {
        let size = 2 + seed as usize % 3;
        let spec = generate_maze(size, 50 + seed).unwrap();
        let tiles = common::maze_bfs(&spec).unwrap();
        let env = GeometricMaze::new(spec).unwrap();
        let cfg = PlannerConfig {
            seed,
            rollouts: 1500,
            ..Default::default()
        };
        let r = run_episode(&env, &UntrainedModels::new(2), &cfg).unwrap();
        let min_steps = tiles.div_ceil(2).max(1);
        let bound = (cfg.horizon + 1 - min_steps) as f64;
        assert!(
            r.record.undiscounted_return <= bound,
            "seed {seed}: {} > {bound}",
            r.record.undiscounted_return
        );
        check_tree(&r.tree, env.bounds().volume()).unwrap();
    }
}

#[test]
fn run_records_are_deterministic_per_seed() {
    let env = GeometricMaze::new(generate_maze(3, 7).unwrap()).unwrap();
    let m = UntrainedModels::new(2);
    for algorithm in Algorithm::ALL {
        let cfg = PlannerConfig {
            seed: 3,
            rollouts: 400,
            ..PlannerConfig::with_algorithm(algorithm)
        };
        let a = run_episode(&env, &m, &cfg).unwrap();
        let b = run_episode(&env, &m, &cfg).unwrap();
        assert_eq!(a.record, b.record, "{}", algorithm.name());
        assert_eq!(a.actions, b.actions);
        assert_eq!(a.node_values, b.node_values);
    }
}
