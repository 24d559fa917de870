//! `cevo`: generate, solve, evolve and analyse constrained instances.
//!
//! Exit codes: 0 on success, 2 on invalid input or arguments, 3 on file
//! system errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use cevo_core::evolver::{
    decode, evolve, parse_template, random_genome, Direction, EvolutionRecord, EvolverConfig, GenomeSpec,
};
use cevo_core::features::{feature_vector, DEFAULT_SAMPLE_COUNT};
use cevo_core::harness::{emit_raster, run_experiment, ExperimentPlan};
use cevo_core::rng::seeded;
use cevo_core::{solve, Bounds, CopInstance, Error, ObjectiveKind, Result, SolverConfig};

#[derive(Parser)]
#[command(name = "cevo", version, about = "Evolve easy and hard constrained optimization instances")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output file, or output directory for `evolve` and `experiment`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Experiment plan JSON.
    #[arg(long, global = true)]
    plan: Option<PathBuf>,
    /// Use the full-length settings instead of the desk-scale defaults.
    #[arg(long, global = true)]
    paper_scale: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Random instance with the given constraint template.
    Generate(InstanceShape),
    /// Solve an instance and print the result JSON.
    Solve {
        instance: PathBuf,
        /// Solver config JSON; defaults depend on --paper-scale.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Evolve an easy or hard instance.
    Evolve {
        #[command(flatten)]
        shape: InstanceShape,
        #[arg(long)]
        direction: Direction,
        /// Evolver config JSON; its seed is replaced by --seed.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Feature CSV (header and one row) of an instance.
    Features {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_COUNT)]
        samples: usize,
    },
    /// Run an experiment plan and write its report.
    Experiment,
    /// 0/1 feasibility grid of a 2-D instance.
    Raster {
        instance: PathBuf,
        #[arg(long, default_value_t = 101)]
        resolution: usize,
    },
}

#[derive(Args)]
struct InstanceShape {
    #[arg(long, default_value = "Sphere")]
    objective: ObjectiveKind,
    #[arg(long, default_value_t = 5)]
    dimension: usize,
    /// Constraint kinds in order, `L` linear and `Q` quadratic, e.g. `LLQ`.
    #[arg(long, default_value = "L")]
    template: String,
}

impl InstanceShape {
    fn spec(&self) -> Result<(GenomeSpec, Bounds)> {
        let spec = GenomeSpec::new(self.dimension, parse_template(&self.template)?)?;
        Ok((spec, Bounds::symmetric_default(self.dimension)?))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn load_instance(path: &Path) -> Result<CopInstance> {
    CopInstance::from_json(&read(path)?)
}

fn workers(g: &Global) -> usize {
    g.workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let out = g.out.as_deref();
    match &cli.command {
        Command::Generate(shape) => {
            let (spec, bounds) = shape.spec()?;
            let genome = random_genome(&spec, &mut seeded(g.seed));
            let instance = decode(&spec, &genome, shape.objective, &bounds)?;
            emit(out, &with_newline(instance.to_json()))
        }
        Command::Solve { instance, config } => {
            let instance = load_instance(instance)?;
            let config = match config {
                Some(p) => SolverConfig::from_json(&read(p)?)?,
                None if g.paper_scale => SolverConfig::paper(instance.dimension),
                None => SolverConfig::desk(instance.dimension),
            };
            let result = solve(&instance, &config, g.seed)?;
            info!("{:?} after {} evaluations", result.status, result.fen);
            emit(out, &with_newline(serde_json::to_string_pretty(&result).map_err(Error::from)?))
        }
        Command::Evolve {
            shape,
            direction,
            config,
        } => {
            let (spec, bounds) = shape.spec()?;
            let config = match config {
                Some(p) => EvolverConfig {
                    seed: g.seed,
                    direction: *direction,
                    ..serde_json::from_str(&read(p)?)?
                },
                None if g.paper_scale => EvolverConfig::paper(shape.dimension, *direction, g.seed),
                None => EvolverConfig::desk(shape.dimension, *direction, g.seed),
            };
            let pool = rayon_pool(workers(g))?;
            let outcome = pool.install(|| evolve(&spec, shape.objective, &bounds, &config))?;
            let instance = decode(&spec, &outcome.best, shape.objective, &bounds)?;
            let meta = serde_json::to_string_pretty(&EvolutionRecord::new(&config, &outcome))
                .map_err(Error::from)?;
            info!("evolved {} instance: fen {}", direction, outcome.best_fitness);
            match out {
                Some(dir) => {
                    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                    write(&dir.join("instance.json"), &with_newline(instance.to_json()))?;
                    write(&dir.join("meta.json"), &with_newline(meta))
                }
                None => {
                    println!("{}", instance.to_json());
                    eprintln!("{meta}");
                    Ok(())
                }
            }
        }
        Command::Features { instance, samples } => {
            let inst = load_instance(instance)?;
            let fv = feature_vector(&inst, *samples, &mut seeded(g.seed))?;
            let id = instance
                .file_stem()
                .map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
            emit(out, &format!("{}\n{}\n", fv.csv_header(), fv.csv_row(&id)))
        }
        Command::Experiment => {
            let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("experiment"));
            let plan = match &g.plan {
                Some(p) => {
                    let mut plan = ExperimentPlan::from_json(&read(p)?)?;
                    if let Some(o) = out {
                        plan.output_dir = o.to_path_buf();
                    }
                    plan
                }
                None if g.paper_scale => ExperimentPlan::paper(dir, g.seed),
                None => ExperimentPlan::desk(dir, g.seed),
            };
            let report = run_experiment(&plan, workers(g))?;
            info!(
                "{} runs executed, report in {}",
                report.executed_runs,
                plan.output_dir.join("report").display()
            );
            print!("{}", report.report.file("fen.csv").unwrap_or_default());
            Ok(())
        }
        Command::Raster {
            instance,
            resolution,
        } => emit(out, &emit_raster(&load_instance(instance)?, *resolution)?),
    }
}

fn rayon_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::contract(format!("cannot start worker pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cevo: {e}");
            match e {
                Error::Io { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
