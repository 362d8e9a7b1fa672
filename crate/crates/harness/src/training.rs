//! Self-play training of the value and policy networks on maze episodes.

use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use vmcts_core::learn::{
    collect_samples, train_epoch, value_mse, InputScaler, Nets, NetworkModels, OptimizerState,
    TrainSample,
};
use vmcts_core::planner::{run_episode, PlannerConfig, PlannerRng, UntrainedModels};

use crate::config::{EnvFamily, TrainingConfig};
use crate::error::Result;
use crate::runner::make_env;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub episodes: usize,
    pub held_out_samples: usize,
    pub held_out_mse_before: f64,
    pub held_out_mse_after: f64,
    /// `(episodes completed, held-out mse)` every `eval_every` episodes.
    pub held_out_trace: Vec<(usize, f64)>,
    pub episode_returns: Vec<f64>,
    pub last_losses: Vec<f64>,
}

pub struct Trained {
    pub nets: Nets,
    pub scaler: InputScaler,
    pub report: TrainingReport,
}

/// Held-out value data: planner trees on mazes outside the training range,
/// searched with uniform actions.
pub fn held_out_set(
    family: EnvFamily,
    cfg: &TrainingConfig,
    planner: &PlannerConfig,
) -> Result<Vec<TrainSample>> {
    let mut out = Vec::new();
    for k in 0..cfg.held_out_mazes as u64 {
        let env = make_env(family, cfg.maze_size, cfg.held_out_seed_base + k, &[])?;
        let pc = PlannerConfig {
            seed: k,
            rollouts: cfg.rollouts,
            ..*planner
        };
        let r = run_episode(env.as_ref(), &UntrainedModels::new(env.action_dim()), &pc)?;
        out.extend(collect_samples(
            &r,
            &InputScaler::new(*env.bounds()),
            pc.gamma,
        ));
    }
    Ok(out)
}

/// Initial networks for `cfg`, identical for every call with the same seed.
pub fn initial_nets(family: EnvFamily, cfg: &TrainingConfig) -> Result<(Nets, InputScaler)> {
    init_with(family, cfg, &mut PlannerRng::seed_from_u64(cfg.seed))
}

fn init_with(
    family: EnvFamily,
    cfg: &TrainingConfig,
    rng: &mut PlannerRng,
) -> Result<(Nets, InputScaler)> {
    let env = make_env(family, cfg.maze_size, cfg.maze_seed_base, &[])?;
    Ok((
        Nets::init(env.state_dim(), env.action_dim(), rng),
        InputScaler::new(*env.bounds()),
    ))
}

/// Alternates one search episode with the current networks and
/// `cfg.train.batches` gradient steps on that episode's tree.
pub fn train(family: EnvFamily, cfg: &TrainingConfig, planner: &PlannerConfig) -> Result<Trained> {
    let mut rng = PlannerRng::seed_from_u64(cfg.seed);
    let (mut nets, scaler) = init_with(family, cfg, &mut rng)?;
    let mut opt = OptimizerState::new(cfg.train.adam, &nets);
    let held = held_out_set(family, cfg, planner)?;
    let before = value_mse(&nets, &held)?;
    let lambda = planner.c / (cfg.rollouts as f64).sqrt();
    let mut trace = vec![(0, before)];
    let mut returns = Vec::with_capacity(cfg.episodes);
    let mut last_losses = Vec::new();
    for ep in 0..cfg.episodes {
        let env = make_env(family, cfg.maze_size, cfg.maze_seed_base + ep as u64, &[])?;
        let pc = PlannerConfig {
            algorithm: cfg.algorithm,
            seed: ep as u64,
            rollouts: cfg.rollouts,
            ..*planner
        };
        let models = NetworkModels::new(nets.clone(), scaler);
        let r = run_episode(env.as_ref(), &models, &pc)?;
        returns.push(r.record.undiscounted_return);
        let data = collect_samples(&r, &scaler, pc.gamma);
        last_losses = train_epoch(&mut nets, &data, lambda, &mut opt, &cfg.train, &mut rng)?;
        let done = ep + 1;
        if cfg.eval_every > 0 && done % cfg.eval_every == 0 && done < cfg.episodes {
            trace.push((done, value_mse(&nets, &held)?));
        }
    }
    let after = value_mse(&nets, &held)?;
    trace.push((cfg.episodes, after));
    let report = TrainingReport {
        episodes: cfg.episodes,
        held_out_samples: held.len(),
        held_out_mse_before: before,
        held_out_mse_after: after,
        held_out_trace: trace,
        episode_returns: returns,
        last_losses,
    };
    Ok(Trained {
        nets,
        scaler,
        report,
    })
}
