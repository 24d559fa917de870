//! Epsilon-constrained differential evolution with an archive and
//! gradient-based mutation.
//!
//! One run works like this:
//!
//! 1. `archive_size` points are sampled uniformly in the box and evaluated.
//! 2. The initial epsilon level is the violation of the `ceil(q * M)`-th
//!    least violated archive member; the best `population_size` archive
//!    members under that level form the population.
//! 3. Every generation each member produces one DE/rand/1/exp child.
//!    Infeasible children are repaired by gradient mutation with probability
//!    `gradient_mutation_rate`. A child replaces its parent when it is not
//!    worse under the current epsilon level, and replaces the worst archive
//!    member when strictly better.
//! 4. The level decays as `eps0 (1 - t/Tc)^cp` and is zero from `Tc` on.
//!
//! A run stops as soon as any evaluated point is feasible with objective
//! value within `success_tolerance` of the optimum value zero, or when the
//! evaluation budget or the generation budget is spent.

mod compare;
mod operators;

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

pub use compare::{epsilon_compare, epsilon_schedule, eps_less, eps_less_eq, eps_order, initial_epsilon};
pub use operators::{de_rand_1_exp, gradient_mutation};

use crate::error::{ensure, Result};
use crate::problem::CopInstance;
use crate::rng::{seeded, RandomStream};
use operators::{de_rand_1_exp_into, gradient_step, StepScratch};
pub(crate) use operators::{pick_donors, pinv_solve};

/// A candidate point with its cached objective value and violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub x: Vec<f64>,
    pub f: f64,
    pub phi: f64,
}

impl Individual {
    pub fn evaluate(instance: &CopInstance, x: Vec<f64>) -> Result<Self> {
        let f = instance.objective_value(&x)?;
        let phi = instance.violation_unchecked(&x);
        Ok(Self { x, f, phi })
    }

    #[inline]
    pub fn key(&self) -> (f64, f64) {
        (self.f, self.phi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub population_size: usize,
    pub archive_size: usize,
    pub generations: u64,
    pub crossover_rate: f64,
    pub scale_factor: f64,
    pub epsilon_control_generation: u64,
    pub initial_level_fraction: f64,
    pub gradient_mutation_rate: f64,
    pub gradient_mutation_repeats: usize,
    pub schedule_exponent: f64,
    pub fen_max: u64,
    pub success_tolerance: f64,
}

impl SolverConfig {
    /// Full-length settings for dimension `n`: N = 40, M = 100n, 1500
    /// generations, CR = 0.5, F = 0.9, Tc = 1000, q = 0.9, Pg = 0.2, Rg = 3,
    /// 300,000 evaluations.
    pub fn paper(n: usize) -> Self {
        Self {
            population_size: 40,
            archive_size: 100 * n.max(1),
            generations: 1500,
            crossover_rate: 0.5,
            scale_factor: 0.9,
            epsilon_control_generation: 1000,
            initial_level_fraction: 0.9,
            gradient_mutation_rate: 0.2,
            gradient_mutation_repeats: 3,
            schedule_exponent: 5.0,
            fen_max: 300_000,
            success_tolerance: 1e-12,
        }
    }

    /// Same settings with the 50,000 evaluation budget used for laptop runs.
    pub fn desk(n: usize) -> Self {
        Self {
            fen_max: 50_000,
            ..Self::paper(n)
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.population_size >= 4, || {
            format!("population_size must be at least 4, got {}", self.population_size)
        })?;
        ensure(self.population_size <= self.archive_size, || {
            format!(
                "population_size {} exceeds archive_size {}",
                self.population_size, self.archive_size
            )
        })?;
        ensure(self.epsilon_control_generation <= self.generations, || {
            format!(
                "epsilon_control_generation {} exceeds generations {}",
                self.epsilon_control_generation, self.generations
            )
        })?;
        ensure((0.0..=1.0).contains(&self.crossover_rate), || {
            format!("crossover_rate must lie in [0, 1], got {}", self.crossover_rate)
        })?;
        ensure(self.scale_factor > 0.0, || {
            format!("scale_factor must be positive, got {}", self.scale_factor)
        })?;
        ensure(self.initial_level_fraction > 0.0 && self.initial_level_fraction <= 1.0, || {
            format!(
                "initial_level_fraction must lie in (0, 1], got {}",
                self.initial_level_fraction
            )
        })?;
        ensure((0.0..=1.0).contains(&self.gradient_mutation_rate), || {
            format!(
                "gradient_mutation_rate must lie in [0, 1], got {}",
                self.gradient_mutation_rate
            )
        })?;
        ensure(self.schedule_exponent >= 0.0, || {
            format!("schedule_exponent must be non-negative, got {}", self.schedule_exponent)
        })?;
        ensure(self.fen_max >= self.archive_size as u64, || {
            format!(
                "fen_max {} cannot cover the {} archive samples",
                self.fen_max, self.archive_size
            )
        })?;
        ensure(self.success_tolerance >= 0.0, || {
            format!("success_tolerance must be non-negative, got {}", self.success_tolerance)
        })
    }

    /// Parses and validates a config document.
    pub fn from_json(s: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(s)?;
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Solved,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub status: SolveStatus,
    pub best: Individual,
    pub fen: u64,
    pub epsilon_trace: Vec<(u64, f64)>,
}

/// Flat wire form of [`SolverResult`].
#[derive(Serialize, Deserialize)]
struct SolverResultRecord {
    status: SolveStatus,
    fen: u64,
    best_x: Vec<f64>,
    best_f: f64,
    best_phi: f64,
    epsilon_trace: Vec<(u64, f64)>,
}

impl Serialize for SolverResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SolverResultRecord {
            status: self.status,
            fen: self.fen,
            best_x: self.best.x.clone(),
            best_f: self.best.f,
            best_phi: self.best.phi,
            epsilon_trace: self.epsilon_trace.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SolverResult {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SolverResultRecord::deserialize(d)?;
        Ok(SolverResult {
            status: r.status,
            best: Individual {
                x: r.best_x,
                f: r.best_f,
                phi: r.best_phi,
            },
            fen: r.fen,
            epsilon_trace: r.epsilon_trace,
        })
    }
}

/// Evaluation bookkeeping shared by every phase of a run.
struct Evaluator<'a> {
    instance: &'a CopInstance,
    fen: u64,
    fen_max: u64,
    tolerance: f64,
    best: Option<Individual>,
    solved: bool,
}

impl<'a> Evaluator<'a> {
    /// Evaluates `x`, or returns `None` when the budget is spent.
    #[inline]
    fn eval(&mut self, x: &[f64]) -> Option<(f64, f64)> {
        if self.fen >= self.fen_max {
            return None;
        }
        self.fen += 1;
        let (f, phi) = self.instance.evaluate_unchecked(x);
        let better = match &self.best {
            None => true,
            Some(b) => eps_less((f, phi), b.key(), 0.0),
        };
        if better {
            match &mut self.best {
                Some(b) => {
                    b.x.clear();
                    b.x.extend_from_slice(x);
                    b.f = f;
                    b.phi = phi;
                }
                None => {
                    self.best = Some(Individual { x: x.to_vec(), f, phi })
                }
            }
        }
        if phi == 0.0 && f.abs() <= self.tolerance {
            self.solved = true;
        }
        Some((f, phi))
    }

    fn finish(self, status: SolveStatus, epsilon_trace: Vec<(u64, f64)>) -> SolverResult {
        SolverResult {
            status,
            best: self.best.expect("at least one evaluation precedes termination"),
            fen: self.fen,
            epsilon_trace,
        }
    }
}

// Maps a non-NaN f64 to a u64 with the same order (-0.0 and 0.0 equal).
#[inline]
fn ordered_bits(x: f64) -> u64 {
    let b = (x + 0.0).to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | 1 << 63
    }
}

/// Integer key whose natural order is [`eps_order`] at `eps`.
#[inline]
fn rank_key((f, phi): (f64, f64), eps: f64) -> u128 {
    let p = if phi <= eps { 0.0 } else { phi };
    (u128::from(ordered_bits(p)) << 64) | u128::from(ordered_bits(f))
}

/// Bounded archive. Members live in fixed slots; a max-heap of
/// `(key, insertion sequence, slot)` keeps the worst member on top, so ties
/// in the epsilon ranking fall back to insertion order.
struct Archive {
    slots: Vec<Individual>,
    heap: BinaryHeap<(u128, u64, u32)>,
    next_seq: u64,
    ranked_at: f64,
}

impl Archive {
    fn new(slots: Vec<Individual>, eps: f64) -> Self {
        let heap = slots
            .iter()
            .enumerate()
            .map(|(i, s)| (rank_key(s.key(), eps), i as u64, i as u32))
            .collect();
        Self {
            next_seq: slots.len() as u64,
            slots,
            heap,
            ranked_at: eps,
        }
    }

    // Only members whose violation crosses between the old and new level
    // change key; without any the heap stands.
    fn rank(&mut self, eps: f64) {
        if eps == self.ranked_at {
            return;
        }
        let old = self.ranked_at;
        let crosses = |s: &Individual| (s.phi <= old) != (s.phi <= eps);
        if self.slots.iter().any(crosses) {
            let mut entries = std::mem::take(&mut self.heap).into_vec();
            for e in &mut entries {
                let s = &self.slots[e.2 as usize];
                if crosses(s) {
                    e.0 = rank_key(s.key(), eps);
                }
            }
            self.heap = BinaryHeap::from(entries);
        }
        self.ranked_at = eps;
    }

    /// The `count` best members in ranking order.
    fn best(&self, count: usize) -> Vec<Individual> {
        self.heap
            .clone()
            .into_sorted_vec()
            .iter()
            .take(count)
            .map(|e| self.slots[e.2 as usize].clone())
            .collect()
    }

    /// Replaces the worst member with the child when the child is strictly
    /// better under the current ranking level.
    fn offer(&mut self, x: &[f64], (f, phi): (f64, f64)) {
        let key = rank_key((f, phi), self.ranked_at);
        let Some(mut top) = self.heap.peek_mut() else {
            return;
        };
        if key >= top.0 {
            return;
        }
        let slot = &mut self.slots[top.2 as usize];
        slot.x.copy_from_slice(x);
        slot.f = f;
        slot.phi = phi;
        top.0 = key;
        top.1 = self.next_seq;
        self.next_seq += 1;
    }
}

/// Runs the solver on `instance` with a generator seeded from `seed`.
pub fn solve(instance: &CopInstance, config: &SolverConfig, seed: u64) -> Result<SolverResult> {
    solve_with(instance, config, &mut seeded(seed))
}

/// Runs the solver drawing randomness from `rng`.
pub fn solve_with<R: RandomStream + ?Sized>(
    instance: &CopInstance,
    config: &SolverConfig,
    rng: &mut R,
) -> Result<SolverResult> {
    run(instance, config, rng, |_, _, _| {})
}

/// [`solve`], calling `observer(generation, eps, population)` at the start
/// of every generation.
pub fn solve_observed<F>(instance: &CopInstance, config: &SolverConfig, seed: u64, observer: F) -> Result<SolverResult>
where
    F: FnMut(u64, f64, &[Individual]),
{
    run(instance, config, &mut seeded(seed), observer)
}

fn run<R, F>(instance: &CopInstance, config: &SolverConfig, rng: &mut R, mut observer: F) -> Result<SolverResult>
where
    R: RandomStream + ?Sized,
    F: FnMut(u64, f64, &[Individual]),
{
    instance.validate()?;
    config.validate()?;
    let bounds = &instance.bounds;
    let n = instance.dimension;
    let mut ev = Evaluator {
        instance,
        fen: 0,
        fen_max: config.fen_max,
        tolerance: config.success_tolerance,
        best: None,
        solved: false,
    };
    let mut trace = Vec::new();

    let mut members = Vec::with_capacity(config.archive_size);
    for _ in 0..config.archive_size {
        let x: Vec<f64> = (0..n)
            .map(|i| rng.uniform_in(bounds.lower[i], bounds.upper[i]))
            .collect();
        let (f, phi) = ev.eval(&x).expect("fen_max covers the archive");
        members.push(Individual { x, f, phi });
        if ev.solved {
            return Ok(ev.finish(SolveStatus::Solved, trace));
        }
    }

    let phis: Vec<f64> = members.iter().map(|a| a.phi).collect();
    let eps0 = initial_epsilon(&phis, config.initial_level_fraction)?;
    let mut archive = Archive::new(members, eps0);
    let mut population = archive.best(config.population_size);

    let mut trial = Vec::with_capacity(n);
    let mut scratch = StepScratch::default();
    for t in 0..config.generations {
        let eps = epsilon_schedule(t, eps0, config.epsilon_control_generation, config.schedule_exponent);
        trace.push((t, eps));
        archive.rank(eps);
        observer(t, eps, &population);
        for i in 0..config.population_size {
            de_rand_1_exp_into(
                i,
                &population,
                bounds,
                config.scale_factor,
                config.crossover_rate,
                rng,
                &mut trial,
            );
            let Some(mut child) = ev.eval(&trial) else {
                return Ok(ev.finish(SolveStatus::Exhausted, trace));
            };
            if ev.solved {
                return Ok(ev.finish(SolveStatus::Solved, trace));
            }
            if child.1 > 0.0 && rng.uniform() < config.gradient_mutation_rate {
                for _ in 0..config.gradient_mutation_repeats {
                    if !gradient_step(&mut trial, instance, &mut scratch) {
                        break;
                    }
                    bounds.clamp(&mut trial);
                    let Some(next) = ev.eval(&trial) else {
                        return Ok(ev.finish(SolveStatus::Exhausted, trace));
                    };
                    if ev.solved {
                        return Ok(ev.finish(SolveStatus::Solved, trace));
                    }
                    child = next;
                    if child.1 == 0.0 {
                        break;
                    }
                }
            }
            archive.offer(&trial, child);
            let parent = &mut population[i];
            if eps_less_eq(child, parent.key(), eps) {
                std::mem::swap(&mut parent.x, &mut trial);
                parent.f = child.0;
                parent.phi = child.1;
            }
        }
    }
    Ok(ev.finish(SolveStatus::Exhausted, trace))
}
