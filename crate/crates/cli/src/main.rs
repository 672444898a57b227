use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use topo_core::error::{Result, TopoError};
use topo_core::harness::{
    default_workers, exit_code, run_experiment, sweep, write_sweep_csv, ExperimentConfig, Task, EXIT_ERROR,
};
use topo_core::model::{describe, MODEL_NAMES};

/// Topological invariants of disordered tight-binding models.
#[derive(Parser)]
#[command(name = "topo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the configuration once per grid value of a parameter.
    Sweep(SweepArgs),
    /// Lists or describes the shipped models.
    Models {
        #[command(subcommand)]
        action: ModelsAction,
    },
    /// Runs a task: spectrum, chern, winding, z2, spin-chern, bbc, boundary-current, streda,
    /// laughlin, kitaev-halfflux, veg, pairing-range or caz.
    #[command(external_subcommand)]
    Task(Vec<String>),
}

#[derive(Subcommand)]
enum ModelsAction {
    List,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Base seed of the ensemble; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to TOPO_WORKERS or the number of cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; overrides the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Dotted path of the parameter in the configuration, e.g. `model.params.m`.
    #[arg(long)]
    param: String,
    /// Comma-separated grid values.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
}

#[derive(Parser)]
#[command(name = "topo")]
struct TaskCli {
    task: String,
    #[command(flatten)]
    run: RunArgs,
}

fn load(run: &RunArgs) -> Result<(ExperimentConfig, usize)> {
    let mut cfg = ExperimentConfig::from_path(&run.config)?;
    if let Some(seed) = run.seed {
        cfg.ensemble.base_seed = seed;
    }
    if let Some(out) = &run.out {
        cfg.output.dir = out.clone();
    }
    Ok((cfg, run.workers.unwrap_or_else(default_workers)))
}

fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse().map_err(|_| TopoError::Config { section: "values".into(), message: format!("'{v}' is not a number") })
        })
        .collect()
}

fn run_task(argv: Vec<String>) -> Result<i32> {
    let args = TaskCli::try_parse_from(std::iter::once("topo".to_string()).chain(argv)).unwrap_or_else(|e| e.exit());
    let task = Task::parse(&args.task)
        .ok_or_else(|| TopoError::Config { section: "task".into(), message: format!("unknown task '{}'", args.task) })?;
    let (mut cfg, workers) = load(&args.run)?;
    cfg.task = task;
    let exp = run_experiment(&cfg, workers)?;
    exp.write(&cfg, &cfg.output.dir)?;
    for r in &exp.records {
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_else(|| "aggregate".into());
        println!("{} seed {seed}: raw {:?} rounded {:?} {}", r.task, r.raw, r.rounded, r.note);
    }
    Ok(exp.exit_code())
}

fn run_sweep(args: SweepArgs) -> Result<i32> {
    let (cfg, workers) = load(&args.run)?;
    let values = parse_values(&args.values)?;
    let rows = sweep(&cfg, &args.param, &values, workers)?;
    std::fs::create_dir_all(&cfg.output.dir)?;
    write_sweep_csv(BufWriter::new(File::create(cfg.output.dir.join("sweep.csv"))?), &args.param, &rows)?;
    for (v, records) in &rows {
        for r in records {
            println!("{} = {v}: raw {:?} rounded {:?}", args.param, r.raw, r.rounded);
        }
    }
    let all: Vec<_> = rows.into_iter().flat_map(|r| r.1).collect();
    Ok(exit_code(&all))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Models { action: ModelsAction::List } => {
            for name in MODEL_NAMES {
                println!("{name}: {}", describe(name).unwrap_or_default());
            }
            Ok(0)
        }
        Command::Sweep(args) => run_sweep(args),
        Command::Task(argv) => run_task(argv),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
