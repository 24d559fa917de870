//! Meta-level differential evolution over constraint coefficients.
//!
//! A genome is the flat list of constraint coefficients of an instance. Its
//! fitness is the number of function evaluations the solver needs on the
//! decoded instance. Minimizing the fitness produces easy instances,
//! maximizing it produces hard ones. Every offset gene is kept at or below
//! zero so the origin, the optimum of all objectives, stays feasible.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::problem::{
    Bounds, Constraint, ConstraintKind, CopInstance, LinearConstraint, ObjectiveKind,
    QuadraticConstraint,
};
use crate::rng::{derive_seed, seeded, RandomStream};
use crate::solver::{solve, SolveStatus, SolverConfig};

/// Coefficient range used for evolved constraints.
pub const DEFAULT_COEFF_BOUND: f64 = 5.0;

const EVOLVER_STREAM: u64 = 0x65766f;
const SOLVER_STREAM: u64 = 0x736f6c;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomeSpec {
    pub dimension: usize,
    pub template: Vec<ConstraintKind>,
    pub coeff_lower: f64,
    pub coeff_upper: f64,
}

impl GenomeSpec {
    pub fn new(dimension: usize, template: Vec<ConstraintKind>) -> Result<Self> {
        let spec = Self {
            dimension,
            template,
            coeff_lower: -DEFAULT_COEFF_BOUND,
            coeff_upper: DEFAULT_COEFF_BOUND,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.dimension >= 1, || "genome dimension must be at least 1".into())?;
        ensure(!self.template.is_empty(), || "constraint template is empty".into())?;
        ensure(self.coeff_lower < self.coeff_upper, || {
            format!(
                "coefficient bounds need lower < upper, got [{}, {}]",
                self.coeff_lower, self.coeff_upper
            )
        })?;
        ensure(self.coeff_lower <= 0.0, || {
            format!(
                "coefficient lower bound {} leaves no room for non-positive offsets",
                self.coeff_lower
            )
        })
    }

    pub fn genome_len(&self) -> usize {
        self.template
            .iter()
            .map(|k| 1 + k.coefficient_count(self.dimension))
            .sum()
    }

    /// Positions of the offset genes, one per templated constraint.
    pub fn offset_positions(&self) -> Vec<usize> {
        let mut pos = 0;
        self.template
            .iter()
            .map(|k| {
                let p = pos;
                pos += 1 + k.coefficient_count(self.dimension);
                p
            })
            .collect()
    }

    /// Per-gene `(lower, upper)` range.
    pub fn gene_ranges(&self) -> Vec<(f64, f64)> {
        let offset_hi = self.coeff_upper.min(0.0);
        let mut out = Vec::with_capacity(self.genome_len());
        for k in &self.template {
            out.push((self.coeff_lower, offset_hi));
            out.extend(std::iter::repeat_n(
                (self.coeff_lower, self.coeff_upper),
                k.coefficient_count(self.dimension),
            ));
        }
        out
    }

    /// Template written as a string of `L`/`Q` letters.
    pub fn template_key(&self) -> String {
        template_key(&self.template)
    }
}

pub fn template_key(template: &[ConstraintKind]) -> String {
    template.iter().map(|k| k.letter()).collect()
}

pub fn parse_template(s: &str) -> Result<Vec<ConstraintKind>> {
    let t: Option<Vec<_>> = s.chars().map(ConstraintKind::from_letter).collect();
    match t {
        Some(t) if !t.is_empty() => Ok(t),
        _ => Err(Error::contract(format!(
            "template '{s}' must be a non-empty string of L and Q letters"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConstraintGenome(pub Vec<f64>);

impl ConstraintGenome {
    pub fn genes(&self) -> &[f64] {
        &self.0
    }

    /// True when every gene lies in its range (offsets at or below zero).
    pub fn is_valid(&self, spec: &GenomeSpec) -> bool {
        self.0.len() == spec.genome_len()
            && self
                .0
                .iter()
                .zip(spec.gene_ranges())
                .all(|(g, (lo, hi))| lo <= *g && *g <= hi)
    }

    /// Clamps each gene into its range.
    pub fn repair(&mut self, spec: &GenomeSpec) {
        for (g, (lo, hi)) in self.0.iter_mut().zip(spec.gene_ranges()) {
            *g = g.clamp(lo, hi);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Easy,
    Hard,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Easy, Direction::Hard];

    /// Cost minimized by the evolver for a given fitness.
    pub fn cost(self, fitness: f64) -> f64 {
        match self {
            Direction::Easy => fitness,
            Direction::Hard => -fitness,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Easy => "easy",
            Direction::Hard => "hard",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Direction::Easy),
            "hard" => Ok(Direction::Hard),
            _ => Err(Error::contract(format!("unknown direction '{s}'"))),
        }
    }
}

/// Gene selection rule of the evolver's crossover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossoverRule {
    /// Gene `i` takes the donor value when `i == cutpoint` or `u_i <= CR`.
    #[default]
    Binomial,
    /// Gene `i` takes the donor value only when `i == cutpoint` and `u_i <= CR`.
    Conjunctive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolverConfig {
    pub direction: Direction,
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub scale_factor: f64,
    pub solver_config: SolverConfig,
    pub seed: u64,
    #[serde(default)]
    pub crossover_rule: CrossoverRule,
}

impl EvolverConfig {
    /// Population 40, CR 0.5, F 0.9, 5000 generations, 300,000 solver evaluations.
    pub fn paper(n: usize, direction: Direction, seed: u64) -> Self {
        Self {
            direction,
            population_size: 40,
            generations: 5000,
            crossover_rate: 0.5,
            scale_factor: 0.9,
            solver_config: SolverConfig::paper(n),
            seed,
            crossover_rule: CrossoverRule::Binomial,
        }
    }

    /// 100 generations and a 50,000 evaluation solver budget.
    pub fn desk(n: usize, direction: Direction, seed: u64) -> Self {
        Self {
            generations: 100,
            solver_config: SolverConfig::desk(n),
            ..Self::paper(n, direction, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.population_size >= 4, || {
            format!("evolver population must be at least 4, got {}", self.population_size)
        })?;
        ensure((0.0..=1.0).contains(&self.crossover_rate), || {
            format!("crossover_rate must lie in [0, 1], got {}", self.crossover_rate)
        })?;
        ensure(self.scale_factor > 0.0, || {
            format!("scale_factor must be positive, got {}", self.scale_factor)
        })?;
        self.solver_config.validate()
    }

    /// Seed shared by every solver call of this run.
    pub fn solver_seed(&self) -> u64 {
        derive_seed(self.seed, &[SOLVER_STREAM])
    }
}

/// Uniform genome: coefficients in `[l_c, u_c]`, offsets in `[l_c, 0]`.
pub fn random_genome<R: RandomStream + ?Sized>(spec: &GenomeSpec, rng: &mut R) -> ConstraintGenome {
    ConstraintGenome(
        spec.gene_ranges()
            .into_iter()
            .map(|(lo, hi)| rng.uniform_in(lo, hi))
            .collect(),
    )
}

/// Builds the instance described by `genome`.
pub fn decode(
    spec: &GenomeSpec,
    genome: &ConstraintGenome,
    objective: ObjectiveKind,
    bounds: &Bounds,
) -> Result<CopInstance> {
    ensure(genome.0.len() == spec.genome_len(), || {
        format!(
            "genome has {} genes but the template needs {}",
            genome.0.len(),
            spec.genome_len()
        )
    })?;
    ensure(bounds.dimension() == spec.dimension, || {
        format!(
            "bounds have dimension {} but the template has {}",
            bounds.dimension(),
            spec.dimension
        )
    })?;
    let n = spec.dimension;
    let mut genes = genome.0.as_slice();
    let mut constraints = Vec::with_capacity(spec.template.len());
    for kind in &spec.template {
        let (chunk, rest) = genes.split_at(1 + kind.coefficient_count(n));
        genes = rest;
        let b = chunk[0];
        ensure(b <= 0.0, || format!("offset gene {b} is positive; the origin would be infeasible"))?;
        constraints.push(match kind {
            ConstraintKind::Linear => Constraint::Linear(LinearConstraint::new(b, chunk[1..].to_vec())),
            ConstraintKind::Quadratic => Constraint::Quadratic(QuadraticConstraint::new(
                b,
                chunk[1..].chunks_exact(2).map(|p| [p[0], p[1]]).collect(),
            )),
        });
    }
    CopInstance::new(objective, bounds.clone(), constraints)
}

/// The genes of an instance's constraints, in template order.
pub fn encode(instance: &CopInstance) -> ConstraintGenome {
    ConstraintGenome(instance.constraints.iter().flat_map(|c| c.genes()).collect())
}

/// Function evaluations the solver spends on the decoded instance, or the
/// budget when it does not solve it.
pub fn genome_fitness(
    genome: &ConstraintGenome,
    spec: &GenomeSpec,
    objective: ObjectiveKind,
    bounds: &Bounds,
    solver_config: &SolverConfig,
    seed: u64,
) -> Result<f64> {
    let instance = decode(spec, genome, objective, bounds)?;
    let result = solve(&instance, solver_config, seed)?;
    Ok(match result.status {
        SolveStatus::Solved => result.fen as f64,
        SolveStatus::Exhausted => solver_config.fen_max as f64,
    })
}

/// Trial genome for `population[target]`: three distinct donors other than
/// the target, a random cutpoint, donor value `P3 + F (P1 - P2)` on the
/// selected genes, then clamping into the gene ranges.
pub fn newsample<R: RandomStream + ?Sized>(
    target: usize,
    population: &[ConstraintGenome],
    spec: &GenomeSpec,
    scale_factor: f64,
    crossover_rate: f64,
    rule: CrossoverRule,
    rng: &mut R,
) -> Result<ConstraintGenome> {
    let np = population.len();
    ensure(np >= 4, || format!("newsample needs at least 4 genomes, got {np}"))?;
    ensure(target < np, || format!("target index {target} out of range"))?;
    let len = spec.genome_len();
    ensure(population.iter().all(|g| g.0.len() == len), || {
        "population genome length does not match the template".into()
    })?;
    let [r1, r2, r3] = crate::solver::pick_donors(target, np, rng);
    let (p1, p2, p3) = (&population[r1].0, &population[r2].0, &population[r3].0);
    let cut = rng.index(len);
    let mut out = population[target].clone();
    for i in 0..len {
        let u = rng.uniform();
        let fire = match rule {
            CrossoverRule::Binomial => i == cut || u <= crossover_rate,
            CrossoverRule::Conjunctive => i == cut && u <= crossover_rate,
        };
        if fire {
            out.0[i] = p3[i] + scale_factor * (p1[i] - p2[i]);
        }
    }
    out.repair(spec);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionOutcome {
    pub best: ConstraintGenome,
    /// Solver evaluations needed by the best genome.
    pub best_fitness: f64,
    /// Best fitness after initialization and after each generation.
    pub history: Vec<f64>,
}

/// Run metadata written next to an evolved instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionRecord {
    pub direction: Direction,
    pub seed: u64,
    pub final_fen: f64,
    pub generations: usize,
    pub fitness_history: Vec<f64>,
}

impl EvolutionRecord {
    pub fn new(config: &EvolverConfig, outcome: &EvolutionOutcome) -> Self {
        Self {
            direction: config.direction,
            seed: config.seed,
            final_fen: outcome.best_fitness,
            generations: config.generations,
            fitness_history: outcome.history.clone(),
        }
    }
}

pub fn evolve(
    spec: &GenomeSpec,
    objective: ObjectiveKind,
    bounds: &Bounds,
    config: &EvolverConfig,
) -> Result<EvolutionOutcome> {
    evolve_observed(spec, objective, bounds, config, |_, _, _| {})
}

/// [`evolve`], calling `observer(generation, population, costs)` after
/// initialization (generation 0) and after every generation.
pub fn evolve_observed<F>(
    spec: &GenomeSpec,
    objective: ObjectiveKind,
    bounds: &Bounds,
    config: &EvolverConfig,
    mut observer: F,
) -> Result<EvolutionOutcome>
where
    F: FnMut(usize, &[ConstraintGenome], &[f64]),
{
    spec.validate()?;
    config.validate()?;
    ensure(bounds.dimension() == spec.dimension, || {
        "bounds dimension does not match the genome template".into()
    })?;
    let mut rng = seeded(derive_seed(config.seed, &[EVOLVER_STREAM]));
    let solver_seed = config.solver_seed();
    let fitness_of = |genomes: &[ConstraintGenome]| -> Result<Vec<f64>> {
        genomes
            .par_iter()
            .map(|g| genome_fitness(g, spec, objective, bounds, &config.solver_config, solver_seed))
            .collect()
    };

    let mut population: Vec<ConstraintGenome> = (0..config.population_size)
        .map(|_| random_genome(spec, &mut rng))
        .collect();
    let mut fitness = fitness_of(&population)?;
    let mut costs: Vec<f64> = fitness.iter().map(|f| config.direction.cost(*f)).collect();
    let mut history = Vec::with_capacity(config.generations + 1);
    let mut best = best_index(&costs);
    history.push(fitness[best]);
    observer(0, &population, &costs);

    for generation in 1..=config.generations {
        let trials = (0..population.len())
            .map(|i| {
                newsample(
                    i,
                    &population,
                    spec,
                    config.scale_factor,
                    config.crossover_rate,
                    config.crossover_rule,
                    &mut rng,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let trial_fitness = fitness_of(&trials)?;
        for (i, (trial, fit)) in trials.into_iter().zip(trial_fitness).enumerate() {
            let cost = config.direction.cost(fit);
            if cost <= costs[i] {
                population[i] = trial;
                fitness[i] = fit;
                costs[i] = cost;
            }
        }
        best = best_index(&costs);
        history.push(fitness[best]);
        observer(generation, &population, &costs);
    }

    Ok(EvolutionOutcome {
        best: population[best].clone(),
        best_fitness: fitness[best],
        history,
    })
}

/// Lowest cost, earliest index on ties.
fn best_index(costs: &[f64]) -> usize {
    costs
        .iter()
        .enumerate()
        .fold(0, |best, (i, c)| if *c < costs[best] { i } else { best })
}
