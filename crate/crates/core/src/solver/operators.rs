//! Variation operators: DE/rand/1/exp and gradient-based repair.

use nalgebra::{DMatrix, DVector};

use super::Individual;
use crate::error::{ensure, Error, Result};
use crate::problem::{Bounds, CopInstance};
use crate::rng::RandomStream;

/// Draws three mutually distinct donor indices, all different from `target`.
pub(crate) fn pick_donors<R: RandomStream + ?Sized>(
    target: usize,
    pop_size: usize,
    rng: &mut R,
) -> [usize; 3] {
    let mut r1 = rng.index(pop_size);
    while r1 == target {
        r1 = rng.index(pop_size);
    }
    let mut r2 = rng.index(pop_size);
    while r2 == target || r2 == r1 {
        r2 = rng.index(pop_size);
    }
    let mut r3 = rng.index(pop_size);
    while r3 == target || r3 == r1 || r3 == r2 {
        r3 = rng.index(pop_size);
    }
    [r1, r2, r3]
}

/// Writes the DE/rand/1/exp trial vector for `population[target]` into `out`.
///
/// The donor expression is `x_r3 + F (x_r1 - x_r2)`. Starting at a random
/// coordinate, donor values are copied into a wrapping block which grows
/// while successive uniform draws stay at or below `cr`. The result is
/// clamped to `bounds`.
pub(crate) fn de_rand_1_exp_into<R: RandomStream + ?Sized>(
    target: usize,
    population: &[Individual],
    bounds: &Bounds,
    f: f64,
    cr: f64,
    rng: &mut R,
    out: &mut Vec<f64>,
) {
    let [r1, r2, r3] = pick_donors(target, population.len(), rng);
    let (x1, x2, x3) = (&population[r1].x, &population[r2].x, &population[r3].x);
    let n = x3.len();
    out.clear();
    out.extend_from_slice(&population[target].x);
    let mut j = rng.index(n);
    let mut taken = 0;
    loop {
        out[j] = x3[j] + f * (x1[j] - x2[j]);
        taken += 1;
        if taken == n || rng.uniform() > cr {
            break;
        }
        j = (j + 1) % n;
    }
    bounds.clamp(out);
}

/// DE/rand/1/exp trial vector for `population[target_index]`.
pub fn de_rand_1_exp<R: RandomStream + ?Sized>(
    target_index: usize,
    population: &[Individual],
    bounds: &Bounds,
    scale_factor: f64,
    crossover_rate: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    ensure(population.len() >= 4, || {
        format!("DE/rand/1 needs at least 4 individuals, got {}", population.len())
    })?;
    ensure(target_index < population.len(), || {
        format!("target index {target_index} out of range")
    })?;
    let n = bounds.dimension();
    ensure(population.iter().all(|ind| ind.x.len() == n), || {
        "population dimension does not match bounds".into()
    })?;
    let mut out = Vec::with_capacity(n);
    de_rand_1_exp_into(target_index, population, bounds, scale_factor, crossover_rate, rng, &mut out);
    Ok(out)
}

/// Reusable buffers for [`gradient_step`].
#[derive(Debug, Default)]
pub(crate) struct StepScratch {
    residuals: Vec<f64>,
    rows: Vec<f64>,
    grad: Vec<f64>,
}

/// One pseudo-inverse Newton step `x - J^+ C` on the violated constraints.
///
/// Constraints whose gradient vanishes at `x` are dropped since the
/// pseudo-inverse ignores them anyway. Returns `false` when nothing is left
/// to move along, leaving `x` untouched.
pub(crate) fn gradient_step(x: &mut [f64], instance: &CopInstance, scratch: &mut StepScratch) -> bool {
    let n = x.len();
    let StepScratch { residuals, rows, grad } = scratch;
    residuals.clear();
    rows.clear();
    grad.resize(n, 0.0);
    for c in &instance.constraints {
        let g = c.value(x);
        if g > 0.0 {
            c.gradient_into(x, grad);
            if grad.iter().any(|v| *v != 0.0) {
                residuals.push(g);
                rows.extend_from_slice(grad);
            }
        }
    }
    match residuals.len() {
        0 => false,
        1 => {
            let norm2: f64 = rows.iter().map(|v| v * v).sum();
            let scale = residuals[0] / norm2;
            for (xi, gi) in x.iter_mut().zip(rows.iter()) {
                *xi -= scale * gi;
            }
            true
        }
        k => {
            let delta = pinv_solve(rows, residuals, k, n);
            for (xi, d) in x.iter_mut().zip(delta.iter()) {
                *xi -= d;
            }
            true
        }
    }
}

/// `J^+ c` for a row-major `k x n` Jacobian, via SVD.
pub(crate) fn pinv_solve(rows: &[f64], c: &[f64], k: usize, n: usize) -> DVector<f64> {
    let j = DMatrix::from_row_slice(k, n, rows);
    let pinv = j
        .pseudo_inverse(1e-12)
        .expect("pseudo-inverse with non-negative epsilon");
    pinv * DVector::from_column_slice(c)
}

/// Repairs an infeasible point with up to `repeats` pseudo-inverse Newton
/// steps on its violated constraints, clamping to the bounds after each
/// step and stopping as soon as the point is feasible.
pub fn gradient_mutation(x: &[f64], instance: &CopInstance, repeats: usize) -> Result<Vec<f64>> {
    ensure(x.len() == instance.dimension, || {
        format!("instance has dimension {} but point has {}", instance.dimension, x.len())
    })?;
    if instance.is_feasible(x) {
        return Err(Error::contract("gradient mutation applies to infeasible points only"));
    }
    let mut y = x.to_vec();
    let mut scratch = StepScratch::default();
    for _ in 0..repeats {
        if !gradient_step(&mut y, instance, &mut scratch) {
            break;
        }
        instance.bounds.clamp(&mut y);
        if instance.is_feasible(&y) {
            break;
        }
    }
    instance.bounds.clamp(&mut y);
    Ok(y)
}
