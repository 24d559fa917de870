use rayon::prelude::*;

use crate::error::{ensure, Result};
use crate::problem::{Bounds, CopInstance};
use crate::rng::{derive_seed, seeded, RandomStream};

/// Sample count used when none is given.
pub const DEFAULT_SAMPLE_COUNT: usize = 1_000_000;

/// The box of half-width `(u_i - l_i) / 10` around the optimum, intersected
/// with the instance bounds.
pub fn vicinity_box(instance: &CopInstance) -> Bounds {
    let b = &instance.bounds;
    let center = instance.optimum();
    let (lower, upper) = (0..instance.dimension)
        .map(|i| {
            let r = b.width(i) / 10.0;
            ((center[i] - r).max(b.lower[i]), (center[i] + r).min(b.upper[i]))
        })
        .unzip();
    Bounds { lower, upper }
}

/// Fraction of `points` satisfying every constraint.
pub fn feasible_fraction(instance: &CopInstance, points: &[Vec<f64>]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let hits = points.iter().filter(|p| instance.is_feasible(p)).count();
    hits as f64 / points.len() as f64
}

fn count_feasible<R: RandomStream + ?Sized>(
    instance: &CopInstance,
    region: &Bounds,
    samples: usize,
    rng: &mut R,
) -> usize {
    let mut x = vec![0.0; instance.dimension];
    let mut hits = 0;
    for _ in 0..samples {
        for (i, v) in x.iter_mut().enumerate() {
            *v = rng.uniform_in(region.lower[i], region.upper[i]);
        }
        if instance.is_feasible(&x) {
            hits += 1;
        }
    }
    hits
}

/// Monte Carlo estimate of the feasible share of the optimum's vicinity box.
pub fn feasibility_ratio<R: RandomStream + ?Sized>(
    instance: &CopInstance,
    sample_count: usize,
    rng: &mut R,
) -> Result<f64> {
    ensure(sample_count >= 1, || "sample count must be at least 1".into())?;
    let region = vicinity_box(instance);
    Ok(count_feasible(instance, &region, sample_count, rng) as f64 / sample_count as f64)
}

/// [`feasibility_ratio`] split into `shards` substreams derived from `seed`.
/// The result depends on `seed` and `shards` only, not on how many threads
/// run the shards.
pub fn feasibility_ratio_sharded(
    instance: &CopInstance,
    sample_count: usize,
    seed: u64,
    shards: usize,
) -> Result<f64> {
    ensure(sample_count >= 1, || "sample count must be at least 1".into())?;
    ensure(shards >= 1, || "shard count must be at least 1".into())?;
    let region = vicinity_box(instance);
    let hits: usize = (0..shards)
        .into_par_iter()
        .map(|s| {
            let share = sample_count / shards + usize::from(s < sample_count % shards);
            let mut rng = seeded(derive_seed(seed, &[s as u64]));
            count_feasible(instance, &region, share, &mut rng)
        })
        .sum();
    Ok(hits as f64 / sample_count as f64)
}
