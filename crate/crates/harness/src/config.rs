//! Experiment configuration, read from JSON and echoed into every output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vmcts_core::env::MazeSpec;
use vmcts_core::learn::TrainConfig;
use vmcts_core::planner::{Algorithm, PlannerConfig};

use crate::error::{io_err, HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvFamily {
    Geometric,
    Dubins,
}

impl EnvFamily {
    pub fn name(self) -> &'static str {
        match self {
            EnvFamily::Geometric => "geometric",
            EnvFamily::Dubins => "dubins",
        }
    }
}

/// Which models drive the planners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// Uniform action sampling and zero value estimates.
    Untrained,
    /// Freshly initialized networks, before any training.
    InitialNetwork,
    /// Networks after the configured training run.
    Trained,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Untrained => "untrained",
            Phase::InitialNetwork => "initial-network",
            Phase::Trained => "trained",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    /// Planner that generates the training data.
    pub algorithm: Algorithm,
    pub episodes: usize,
    pub maze_size: usize,
    /// Rollouts per training episode.
    pub rollouts: usize,
    /// Maze seed of training episode `k` is `maze_seed_base + k`.
    pub maze_seed_base: u64,
    /// Held-out value data comes from this many mazes never used for training.
    pub held_out_mazes: usize,
    pub held_out_seed_base: u64,
    /// Seeds network initialization and minibatch shuffling.
    pub seed: u64,
    /// Gradient steps per episode come from `train.batches`.
    pub train: TrainConfig,
    /// Held-out mse is recorded every this many episodes.
    pub eval_every: usize,
    /// Load networks from this checkpoint instead of training.
    pub checkpoint: Option<PathBuf>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            algorithm: Algorithm::VolumeMcts,
            episodes: 200,
            maze_size: 3,
            rollouts: 1000,
            maze_seed_base: 5000,
            held_out_mazes: 3,
            held_out_seed_base: 9000,
            seed: 0,
            train: TrainConfig {
                batches: 5,
                ..TrainConfig::default()
            },
            eval_every: 20,
            checkpoint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub runs_csv: String,
    pub table_json: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("results"),
            runs_csv: "runs.csv".into(),
            table_json: "table.json".into(),
        }
    }
}

impl OutputConfig {
    pub fn runs_path(&self) -> PathBuf {
        self.dir.join(&self.runs_csv)
    }

    pub fn table_path(&self) -> PathBuf {
        self.dir.join(&self.table_json)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub env: EnvFamily,
    pub sizes: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub rollouts: usize,
    pub seeds: Vec<u64>,
    pub phase: Phase,
    /// Maze for seed `s` is generated from `maze_seed_base + s`.
    pub maze_seed_base: u64,
    /// Shared planner settings; `algorithm`, `seed` and `rollouts` are set per cell.
    pub planner: PlannerConfig,
    pub training: TrainingConfig,
    /// Mazes used instead of generated ones for their size, for every seed.
    pub pinned_mazes: Vec<MazeSpec>,
    pub outputs: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::geometric()
    }
}

impl ExperimentConfig {
    /// Geometric maze, no training.
    pub fn geometric() -> Self {
        ExperimentConfig {
            name: "geometric-untrained".into(),
            env: EnvFamily::Geometric,
            sizes: vec![2, 3, 4, 5, 6],
            algorithms: vec![
                Algorithm::Alphazero,
                Algorithm::AlphazeroCbe,
                Algorithm::VolumeMcts,
            ],
            rollouts: 5000,
            seeds: (0..10).collect(),
            phase: Phase::Untrained,
            maze_seed_base: 1000,
            planner: PlannerConfig::default(),
            training: TrainingConfig::default(),
            pinned_mazes: Vec::new(),
            outputs: OutputConfig::default(),
        }
    }

    /// Dubins car, no training.
    pub fn dubins() -> Self {
        ExperimentConfig {
            name: "dubins-untrained".into(),
            env: EnvFamily::Dubins,
            sizes: vec![2, 3, 4],
            algorithms: vec![Algorithm::Alphazero, Algorithm::VolumeMcts],
            ..Self::geometric()
        }
    }

    /// Volume-MCTS against its zero-reward ablation.
    pub fn ablation() -> Self {
        ExperimentConfig {
            name: "ablation".into(),
            sizes: vec![2, 3, 4, 5],
            algorithms: vec![Algorithm::VolumeMcts, Algorithm::VolumeRrtAblation],
            ..Self::geometric()
        }
    }

    /// Volume-MCTS on the training maze size with trained networks.
    pub fn trained() -> Self {
        ExperimentConfig {
            name: "geometric-trained".into(),
            sizes: vec![3],
            algorithms: vec![Algorithm::VolumeMcts],
            phase: Phase::Trained,
            ..Self::geometric()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "geometric" => Some(Self::geometric()),
            "dubins" => Some(Self::dubins()),
            "ablation" => Some(Self::ablation()),
            "trained" => Some(Self::trained()),
            _ => None,
        }
    }

    /// Widens the grid to the full published one: 30 seeds, every
    /// open- and closed-loop baseline, sizes up to 9 (6 for Dubins).
    pub fn full(mut self) -> Self {
        self.seeds = (0..30).collect();
        self.sizes = match self.env {
            EnvFamily::Geometric => (2..=9).collect(),
            EnvFamily::Dubins => (2..=6).collect(),
        };
        if self.algorithms.contains(&Algorithm::Alphazero) {
            for a in [Algorithm::AlphazeroCbe, Algorithm::AlphazeroOpenloop] {
                if !self.algorithms.contains(&a) {
                    self.algorithms.push(a);
                }
            }
        }
        self
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.rollouts == 0 {
            return bad("rollouts must be positive");
        }
        if self.sizes.iter().any(|&s| s < 2) {
            return bad("maze sizes start at 2");
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms listed");
        }
        if self.phase == Phase::Trained
            && self.training.episodes == 0
            && self.training.checkpoint.is_none()
        {
            return bad("trained phase needs training episodes or a checkpoint");
        }
        if self.training.train.batch_size == 0 {
            return bad("training batch size must be positive");
        }
        for m in &self.pinned_mazes {
            m.validate()?;
        }
        if self.outputs.runs_csv.is_empty() || self.outputs.table_json.is_empty() {
            return bad("output file names must be non-empty");
        }
        self.planner.validate()?;
        Ok(())
    }

    pub fn planner_for(&self, algorithm: Algorithm, seed: u64) -> PlannerConfig {
        PlannerConfig {
            algorithm,
            seed,
            rollouts: self.rollouts,
            ..self.planner
        }
    }
}
