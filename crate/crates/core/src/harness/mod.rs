//! Experiment orchestration: evolves easy and hard instances for every cell
//! of a plan, persists each run, and assembles the report tables.
//!
//! Layout under the plan's output directory:
//!
//! ```text
//! plan.json
//! runs/<objective>-<template>-<direction>-<run>/instance.json
//! runs/<objective>-<template>-<direction>-<run>/meta.json
//! report/*.csv
//! ```
//!
//! `meta.json` is written last, so its presence marks a completed run and
//! a rerun skips it.

mod raster;
mod report;

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use raster::emit_raster;
pub use report::{quantile, summarize, summary, CellKey, Report, Summary};

use crate::error::{ensure, Error, Result};
use crate::evolver::{
    decode, evolve, parse_template, template_key, CrossoverRule, Direction, EvolverConfig, GenomeSpec,
};
use crate::features::{feature_vector, FeatureVector, DEFAULT_SAMPLE_COUNT};
use crate::problem::{Bounds, ConstraintKind, CopInstance, ObjectiveKind};
use crate::rng::{derive_seed, seeded};
use crate::solver::SolverConfig;

const FEATURE_STREAM: u64 = 0x66656174;

/// Evolver parameters shared by every run of a plan. Direction and seed are
/// set per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanEvolver {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub scale_factor: f64,
    #[serde(default)]
    pub crossover_rule: CrossoverRule,
}

impl PlanEvolver {
    fn config(&self, direction: Direction, seed: u64, solver: &SolverConfig) -> EvolverConfig {
        EvolverConfig {
            direction,
            population_size: self.population_size,
            generations: self.generations,
            crossover_rate: self.crossover_rate,
            scale_factor: self.scale_factor,
            solver_config: solver.clone(),
            seed,
            crossover_rule: self.crossover_rule,
        }
    }
}

impl From<&EvolverConfig> for PlanEvolver {
    fn from(c: &EvolverConfig) -> Self {
        Self {
            population_size: c.population_size,
            generations: c.generations,
            crossover_rate: c.crossover_rate,
            scale_factor: c.scale_factor,
            crossover_rule: c.crossover_rule,
        }
    }
}

fn default_sample_count() -> usize {
    DEFAULT_SAMPLE_COUNT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub objectives: Vec<ObjectiveKind>,
    pub dimension: usize,
    pub constraint_templates: Vec<Vec<ConstraintKind>>,
    pub repeats: usize,
    pub directions: Vec<Direction>,
    pub evolver_config: PlanEvolver,
    pub solver_config: SolverConfig,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Samples per instance for the vicinity feasibility ratio.
    #[serde(default = "default_sample_count")]
    pub sample_count: usize,
}

fn templates(keys: &[&str]) -> Vec<Vec<ConstraintKind>> {
    keys.iter()
        .map(|k| parse_template(k).expect("built-in template"))
        .collect()
}

impl ExperimentPlan {
    /// Sphere, n = 5, one to five linear constraints, 10 repeats, desk
    /// evolver and solver settings.
    pub fn desk(output_dir: impl Into<PathBuf>, master_seed: u64) -> Self {
        let n = 5;
        Self {
            objectives: vec![ObjectiveKind::Sphere],
            dimension: n,
            constraint_templates: templates(&["L", "LL", "LLL", "LLLL", "LLLLL"]),
            repeats: 10,
            directions: Direction::BOTH.to_vec(),
            evolver_config: (&EvolverConfig::desk(n, Direction::Easy, 0)).into(),
            solver_config: SolverConfig::desk(n),
            master_seed,
            output_dir: output_dir.into(),
            sample_count: DEFAULT_SAMPLE_COUNT,
        }
    }

    /// All objectives, n = 30, one to five linear or quadratic constraints
    /// plus five-constraint mixes, 30 repeats, full-length settings.
    pub fn paper(output_dir: impl Into<PathBuf>, master_seed: u64) -> Self {
        let n = 30;
        Self {
            objectives: ObjectiveKind::ALL.to_vec(),
            dimension: n,
            constraint_templates: templates(&[
                "L", "LL", "LLL", "LLLL", "LLLLL", "Q", "QQ", "QQQ", "QQQQ", "QQQQQ", "LLLLQ", "LLLQQ",
                "LLQQQ", "LQQQQ",
            ]),
            repeats: 30,
            directions: Direction::BOTH.to_vec(),
            evolver_config: (&EvolverConfig::paper(n, Direction::Easy, 0)).into(),
            solver_config: SolverConfig::paper(n),
            master_seed,
            output_dir: output_dir.into(),
            sample_count: DEFAULT_SAMPLE_COUNT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.dimension >= 1, || "plan dimension must be at least 1".into())?;
        ensure(!self.objectives.is_empty(), || "plan needs at least one objective".into())?;
        ensure(!self.constraint_templates.is_empty(), || "plan needs at least one template".into())?;
        ensure(self.repeats >= 1, || "repeats must be at least 1".into())?;
        ensure(!self.directions.is_empty(), || "plan needs at least one direction".into())?;
        ensure(self.sample_count >= 1, || "sample_count must be at least 1".into())?;
        let mut seen = Vec::new();
        for d in &self.directions {
            ensure(!seen.contains(d), || format!("direction {d} listed twice"))?;
            seen.push(*d);
        }
        for t in &self.constraint_templates {
            GenomeSpec::new(self.dimension, t.clone())?;
        }
        self.evolver_config
            .config(Direction::Easy, 0, &self.solver_config)
            .validate()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let plan: Self = serde_json::from_str(s)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialization cannot fail")
    }

    /// Cells in plan order: objectives outermost, then templates, then
    /// directions.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut cells = Vec::new();
        for objective in &self.objectives {
            for t in &self.constraint_templates {
                for direction in &self.directions {
                    cells.push(CellKey {
                        objective: *objective,
                        template: template_key(t),
                        direction: *direction,
                    });
                }
            }
        }
        cells
    }

    /// Seed of run `run` in cell (`objective`, `template`). The direction is
    /// not part of the key, so easy and hard runs pair up on equal seeds.
    pub fn run_seed(&self, objective_index: usize, template_index: usize, run: usize) -> u64 {
        let cell = (objective_index * self.constraint_templates.len() + template_index) as u64;
        derive_seed(self.master_seed, &[cell, run as u64])
    }

    fn jobs(&self) -> Vec<Job> {
        let mut jobs = Vec::new();
        for (oi, objective) in self.objectives.iter().enumerate() {
            for (ti, t) in self.constraint_templates.iter().enumerate() {
                for direction in &self.directions {
                    for run in 0..self.repeats {
                        jobs.push(Job {
                            objective: *objective,
                            template: t.clone(),
                            direction: *direction,
                            run,
                            seed: self.run_seed(oi, ti, run),
                        });
                    }
                }
            }
        }
        jobs
    }
}

/// Everything persisted about one completed evolver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub objective: ObjectiveKind,
    pub template: String,
    pub direction: Direction,
    pub run: usize,
    pub seed: u64,
    /// Solver evaluations needed by the evolved instance.
    pub final_fen: f64,
    pub generations: usize,
    pub fitness_history: Vec<f64>,
    pub features: FeatureVector,
}

impl RunRecord {
    pub fn name(&self) -> String {
        run_name(self.objective, &self.template, self.direction, self.run)
    }

    pub fn cell(&self) -> CellKey {
        CellKey {
            objective: self.objective,
            template: self.template.clone(),
            direction: self.direction,
        }
    }
}

fn run_name(objective: ObjectiveKind, template: &str, direction: Direction, run: usize) -> String {
    format!("{objective}-{template}-{direction}-{run:03}")
}

struct Job {
    objective: ObjectiveKind,
    template: Vec<ConstraintKind>,
    direction: Direction,
    run: usize,
    seed: u64,
}

impl Job {
    fn name(&self) -> String {
        run_name(self.objective, &template_key(&self.template), self.direction, self.run)
    }

    fn execute(&self, plan: &ExperimentPlan) -> Result<(CopInstance, RunRecord)> {
        let n = plan.dimension;
        let spec = GenomeSpec::new(n, self.template.clone())?;
        let bounds = Bounds::symmetric_default(n)?;
        let config = plan
            .evolver_config
            .config(self.direction, self.seed, &plan.solver_config);
        let outcome = evolve(&spec, self.objective, &bounds, &config)?;
        let instance = decode(&spec, &outcome.best, self.objective, &bounds)?;
        let mut rng = seeded(derive_seed(self.seed, &[FEATURE_STREAM]));
        let features = feature_vector(&instance, plan.sample_count, &mut rng)?;
        let record = RunRecord {
            objective: self.objective,
            template: template_key(&self.template),
            direction: self.direction,
            run: self.run,
            seed: self.seed,
            final_fen: outcome.best_fitness,
            generations: config.generations,
            fitness_history: outcome.history,
            features,
        };
        Ok((instance, record))
    }
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    /// Runs evolved by this call; completed runs found on disk are not counted.
    pub executed_runs: usize,
    /// Every run of the plan, sorted by cell then seed.
    pub runs: Vec<RunRecord>,
    pub report: Report,
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn load_record(dir: &Path) -> Result<Option<RunRecord>> {
    let meta = dir.join("meta.json");
    if !meta.exists() {
        return Ok(None);
    }
    Ok(Some(serde_json::from_str(&read_file(&meta)?)?))
}

/// Runs every missing job of `plan` on up to `workers` threads, then
/// summarizes all runs and writes the report CSVs.
pub fn run_experiment(plan: &ExperimentPlan, workers: usize) -> Result<ExperimentReport> {
    plan.validate()?;
    ensure(workers >= 1, || "worker count must be at least 1".into())?;
    let out = &plan.output_dir;
    let runs_dir = out.join("runs");
    create_dir(&runs_dir)?;

    let plan_path = out.join("plan.json");
    if plan_path.exists() {
        let existing: ExperimentPlan = serde_json::from_str(&read_file(&plan_path)?)?;
        let same = ExperimentPlan {
            output_dir: plan.output_dir.clone(),
            ..existing
        } == *plan;
        ensure(same, || {
            format!("{} holds a different plan; use a fresh output directory", out.display())
        })?;
    } else {
        write_file(&plan_path, &plan.to_json())?;
    }

    let jobs = plan.jobs();
    let pending: Vec<&Job> = jobs
        .iter()
        .filter(|j| !runs_dir.join(j.name()).join("meta.json").exists())
        .collect();
    info!("{} runs planned, {} to execute", jobs.len(), pending.len());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::contract(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        pending.par_iter().try_for_each(|job| -> Result<()> {
            let dir = runs_dir.join(job.name());
            create_dir(&dir)?;
            let (instance, record) = job.execute(plan)?;
            write_file(&dir.join("instance.json"), &instance.to_json())?;
            write_file(
                &dir.join("meta.json"),
                &serde_json::to_string_pretty(&record).expect("record serialization cannot fail"),
            )?;
            info!("{} done: fen {}", job.name(), record.final_fen);
            Ok(())
        })
    })?;

    let mut runs = Vec::with_capacity(jobs.len());
    for job in &jobs {
        let record = load_record(&runs_dir.join(job.name()))?
            .ok_or_else(|| Error::contract(format!("run {} did not complete", job.name())))?;
        runs.push(record);
    }
    let report = summarize(plan, &runs);
    let report_dir = out.join("report");
    create_dir(&report_dir)?;
    report.write_to(&report_dir)?;
    Ok(ExperimentReport {
        executed_runs: pending.len(),
        runs: report.runs.clone(),
        report,
    })
}
