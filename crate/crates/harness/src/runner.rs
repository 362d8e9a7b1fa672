//! Parallel execution of an experiment grid.
//!
//! Every `(algorithm, size, seed)` cell is an independent search on a rayon
//! pool. Finished cells go to one writer thread, which appends them to
//! `runs.csv` in grid order and flushes after each row, so an interrupted
//! run leaves a valid prefix and identical configs give identical files.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use vmcts_core::env::{generate_maze, DubinsMaze, Environment, GeometricMaze, MazeSpec};
use vmcts_core::learn::{InputScaler, Nets, NetworkModels};
use vmcts_core::planner::{run_episode, Algorithm, Models, UntrainedModels};

use crate::config::{EnvFamily, ExperimentConfig, Phase};
use crate::error::{HarnessError, Result};
use crate::formats::{load_checkpoint, save_checkpoint, write_json};
use crate::records::{ResultsTable, RunRow};
use crate::training::{initial_nets, train, TrainingReport};

pub fn maze_for(size: usize, maze_seed: u64, pinned: &[MazeSpec]) -> Result<MazeSpec> {
    match pinned.iter().find(|m| m.size_n == size) {
        Some(m) => Ok(m.clone()),
        None => Ok(generate_maze(size, maze_seed)?),
    }
}

pub fn make_env(
    family: EnvFamily,
    size: usize,
    maze_seed: u64,
    pinned: &[MazeSpec],
) -> Result<Box<dyn Environment>> {
    let spec = maze_for(size, maze_seed, pinned)?;
    Ok(match family {
        EnvFamily::Geometric => Box::new(GeometricMaze::new(spec)?),
        EnvFamily::Dubins => Box::new(DubinsMaze::new(spec)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub size: usize,
    pub seed: u64,
}

pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &algorithm in &cfg.algorithms {
        for &size in &cfg.sizes {
            for &seed in &cfg.seeds {
                out.push(Cell {
                    algorithm,
                    size,
                    seed,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub table: ResultsTable,
    pub rows: Vec<RunRow>,
    pub training: Option<TrainingReport>,
}

/// Networks shared by every cell of a network phase.
enum PhaseModels {
    Uniform,
    Network(Nets),
}

impl PhaseModels {
    fn for_env(&self, env: &dyn Environment) -> Box<dyn Models> {
        match self {
            PhaseModels::Uniform => Box::new(UntrainedModels::new(env.action_dim())),
            PhaseModels::Network(nets) => Box::new(NetworkModels::new(
                nets.clone(),
                InputScaler::new(*env.bounds()),
            )),
        }
    }
}

/// Runs one cell and times it.
pub fn run_cell(
    cfg: &ExperimentConfig,
    models: &dyn Fn(&dyn Environment) -> Box<dyn Models>,
    cell: Cell,
) -> Result<RunRow> {
    let env = make_env(
        cfg.env,
        cell.size,
        cfg.maze_seed_base + cell.seed,
        &cfg.pinned_mazes,
    )?;
    let m = models(env.as_ref());
    let pc = cfg.planner_for(cell.algorithm, cell.seed);
    let t = Instant::now();
    let r = run_episode(env.as_ref(), m.as_ref(), &pc)?;
    Ok(RunRow {
        algorithm: cell.algorithm.name().into(),
        env: cfg.env.name().into(),
        size: cell.size,
        phase: cfg.phase.name().into(),
        seed: cell.seed,
        ret: r.record.undiscounted_return,
        success: r.record.success,
        expansions_to_goal: r.record.expansions_to_goal,
        ms: t.elapsed().as_millis() as u64,
    })
}

/// Runs the whole grid with `workers` threads and writes `runs.csv`,
/// `table.json` and `config.json` (plus `training.json` and
/// `checkpoint.bin` when networks are trained) into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<RunOutcome> {
    cfg.validate()?;
    let dir = &cfg.outputs.dir;
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Unwritable {
        path: dir.clone(),
        source,
    })?;
    let runs_path = cfg.outputs.runs_path();
    let file = File::create(&runs_path).map_err(|source| HarnessError::Unwritable {
        path: runs_path.clone(),
        source,
    })?;
    write_json(&dir.join("config.json"), cfg)?;

    let (phase_models, training) = match cfg.phase {
        Phase::Untrained => (PhaseModels::Uniform, None),
        Phase::InitialNetwork => (
            PhaseModels::Network(initial_nets(cfg.env, &cfg.training)?.0),
            None,
        ),
        Phase::Trained => match &cfg.training.checkpoint {
            Some(path) => (PhaseModels::Network(load_checkpoint(path)?), None),
            None => {
                let planner = cfg.planner_for(cfg.training.algorithm, 0);
                let t = train(cfg.env, &cfg.training, &planner)?;
                save_checkpoint(&dir.join("checkpoint.bin"), &t.nets)?;
                write_json(&dir.join("training.json"), &t.report)?;
                (PhaseModels::Network(t.nets), Some(t.report))
            }
        },
    };
    let models = |env: &dyn Environment| phase_models.for_env(env);

    let grid = cells(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let (tx, rx) = mpsc::channel::<(usize, Result<RunRow>)>();
    let rows = std::thread::scope(|s| {
        let writer = s.spawn(move || write_in_order(file, rx));
        pool.install(|| {
            grid.par_iter()
                .enumerate()
                .for_each_with(tx, |tx, (i, &cell)| {
                    // the writer only stops early on an error, which is reported below
                    let _ = tx.send((i, run_cell(cfg, &models, cell)));
                })
        });
        writer.join().expect("writer thread panicked")
    })?;

    let table = ResultsTable::from_runs(cfg.clone(), &rows);
    table.write(&cfg.outputs.table_path())?;
    Ok(RunOutcome {
        table,
        rows,
        training,
    })
}

fn write_in_order(file: File, rx: mpsc::Receiver<(usize, Result<RunRow>)>) -> Result<Vec<RunRow>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    w.write_record(crate::records::RUNS_HEADER)?;
    w.flush().map_err(csv::Error::from)?;
    let mut pending = BTreeMap::new();
    let mut rows = Vec::new();
    for (i, row) in rx {
        pending.insert(i, row?);
        while let Some(row) = pending.remove(&rows.len()) {
            w.serialize(&row)?;
            w.flush().map_err(csv::Error::from)?;
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Runs one episode and returns everything needed for a tree dump.
pub fn single_episode(
    cfg: &ExperimentConfig,
    algorithm: Algorithm,
    size: usize,
    seed: u64,
) -> Result<(vmcts_core::planner::EpisodeResult, MazeSpec)> {
    let maze = maze_for(size, cfg.maze_seed_base + seed, &cfg.pinned_mazes)?;
    let env = make_env(cfg.env, size, cfg.maze_seed_base + seed, &cfg.pinned_mazes)?;
    let models: Box<dyn Models> = match cfg.phase {
        Phase::Untrained => Box::new(UntrainedModels::new(env.action_dim())),
        Phase::InitialNetwork => Box::new(NetworkModels::new(
            initial_nets(cfg.env, &cfg.training)?.0,
            InputScaler::new(*env.bounds()),
        )),
        Phase::Trained => {
            let path = cfg.training.checkpoint.as_deref().ok_or_else(|| {
                HarnessError::Config(
                    "tree export in the trained phase needs training.checkpoint".into(),
                )
            })?;
            Box::new(NetworkModels::new(
                load_checkpoint(Path::new(path))?,
                InputScaler::new(*env.bounds()),
            ))
        }
    };
    Ok((
        run_episode(
            env.as_ref(),
            models.as_ref(),
            &cfg.planner_for(algorithm, seed),
        )?,
        maze,
    ))
}
