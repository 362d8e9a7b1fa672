use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use vmcts::bound::{run_exploration_bound_check, CorridorLayout};
use vmcts::config::ExperimentConfig;
use vmcts::formats::{dump_kd, write_json, TreeDump};
use vmcts::props::{run_property_suite, Fault};
use vmcts::runner::{make_env, run_experiment, single_episode};
use vmcts_core::planner::{Algorithm, PlannerConfig, UntrainedModels, VolumeSearch};

#[derive(Parser)]
#[command(name = "vmcts", version, about = "Volume-regularized MCTS experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write runs.csv and table.json.
    Run(GridArgs),
    /// Check the exploration bound on a zero-reward corridor.
    BoundCheck {
        /// Trajectory states to the target, counting the start.
        #[arg(long, default_value_t = 10)]
        hops: u32,
        #[arg(long, default_value_t = 40)]
        seeds: u64,
        #[arg(long, default_value_t = 2_000_000)]
        iteration_cap: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run the invariant suite and write props.json.
    Props {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inject a known defect to check that the suite reports it.
        #[arg(long, value_parser = ["volume-accounting"])]
        fault: Option<String>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run one episode and write its search tree to tree_<seed>.json.
    ExportTree {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "volume-mcts")]
        algorithm: String,
        #[arg(long, default_value_t = 3)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the k-d partition of a search with the same settings to kd_<seed>.json.
        #[arg(long)]
        kd: bool,
    },
}

#[derive(Args)]
struct GridArgs {
    /// Experiment config file (JSON).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in grid: geometric, dubins, ablation or trained.
    #[arg(long)]
    preset: Option<String>,
    /// Number of seeds, starting at 0.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    rollouts: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Widen to the full grid: 30 seeds, all baselines, larger mazes.
    #[arg(long)]
    full: bool,
}

impl GridArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => ExperimentConfig::preset(name)
                .with_context(|| format!("unknown preset {name:?}"))?,
            (None, None) => ExperimentConfig::geometric(),
        };
        if self.full {
            cfg = cfg.full();
        }
        if let Some(n) = self.seeds {
            cfg.seeds = (0..n).collect();
        }
        if let Some(r) = self.rollouts {
            cfg.rollouts = r;
        }
        if let Some(dir) = &self.out {
            cfg.outputs.dir = dir.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(grid) => {
            let cfg = grid.config()?;
            let outcome = run_experiment(&cfg, grid.workers())?;
            for row in &outcome.table.rows {
                println!(
                    "{:<20} {:<9} size {:>2}  {:>6.2} ± {:<5.2} (n={})",
                    row.algorithm, row.env, row.size, row.mean, row.stderr, row.n
                );
            }
            println!("wrote {}", cfg.outputs.runs_path().display());
            println!("wrote {}", cfg.outputs.table_path().display());
        }
        Command::BoundCheck {
            hops,
            seeds,
            iteration_cap,
            out,
        } => {
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let seeds: Vec<u64> = (0..seeds).collect();
            let report = run_exploration_bound_check(
                hops,
                CorridorLayout::default(),
                &seeds,
                iteration_cap,
                &PlannerConfig::default(),
            )?;
            let path = out.join("bound.json");
            write_json(&path, &report)?;
            println!(
                "closed form as stated: N* = {:.2}, reached within N*: {:.3}",
                report.n_star_as_printed, report.success_at_printed
            );
            println!(
                "incomplete-Gamma bound: N* = {:.0}, bound at N* = {:.3}, reached within N*: {:.3}, within 2N*: {:.3}",
                report.n_star,
                report.lower_bound_at_n_star,
                report.success_at_n_star,
                report.success_at_double_n_star
            );
            println!("wrote {}", path.display());
            if !report.passed_as_printed {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Props { seed, fault, out } => {
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let fault = fault.map(|_| Fault::VolumeAccounting);
            let report = run_property_suite(seed, fault);
            let path = out.join("props.json");
            write_json(&path, &report)?;
            for p in &report.properties {
                println!(
                    "{} {:<40} cases {:>6}  {} ms",
                    if p.passed { "ok  " } else { "FAIL" },
                    p.name,
                    p.cases,
                    p.ms
                );
            }
            println!("wrote {}", path.display());
            if !report.passed {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::ExportTree {
            grid,
            algorithm,
            size,
            seed,
            kd,
        } => {
            let cfg = grid.config()?;
            let Some(algorithm) = Algorithm::from_name(&algorithm) else {
                bail!("unknown algorithm {algorithm:?}");
            };
            let dir = &cfg.outputs.dir;
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let (result, maze) = single_episode(&cfg, algorithm, size, seed)?;
            let path = dir.join(format!("tree_{seed}.json"));
            write_json(&path, &TreeDump::new(&result, Some(maze)))?;
            println!("wrote {} ({} nodes)", path.display(), result.tree.len());
            if kd {
                if !matches!(
                    algorithm,
                    Algorithm::VolumeMcts | Algorithm::VolumeRrtAblation
                ) {
                    bail!("--kd needs a volume-based algorithm");
                }
                let env = make_env(cfg.env, size, cfg.maze_seed_base + seed, &cfg.pinned_mazes)?;
                let models = UntrainedModels::new(env.action_dim());
                let mut search =
                    VolumeSearch::new(env.as_ref(), &models, &cfg.planner_for(algorithm, seed))?;
                search.run(cfg.rollouts)?;
                let path = dir.join(format!("kd_{seed}.json"));
                write_json(&path, &dump_kd(search.kd()))?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
