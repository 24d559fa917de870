use nalgebra::{DMatrix, DVector};

use crate::problem::{Bounds, Constraint, LinearConstraint, QuadraticConstraint};
use crate::rng::{seeded, RandomStream};

/// A point counts as lying on a zero surface when `|g| <=` this.
pub const SURFACE_TOLERANCE: f64 = 1e-9;

const NEWTON_TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 200;
const RANDOM_STARTS: usize = 8;
const STARTS_SEED: u64 = 0x6469_7374;

/// `|a.p + b| / |a|`, or infinity when `a` is all zeros.
pub fn linear_distance(lc: &LinearConstraint, point: &[f64]) -> f64 {
    let norm = lc.a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return f64::INFINITY;
    }
    lc.value(point).abs() / norm
}

/// Starting points shared by the distance and intersection searches: the
/// points one vicinity radius along each coordinate axis from `point`, then
/// a fixed set of uniform points in the bounds.
pub(crate) fn start_points(point: &[f64], bounds: &Bounds) -> Vec<Vec<f64>> {
    let n = point.len();
    let mut starts = Vec::with_capacity(2 * n + RANDOM_STARTS);
    for i in 0..n {
        let r = bounds.width(i) / 10.0;
        for sign in [1.0, -1.0] {
            let mut s = point.to_vec();
            s[i] += sign * r;
            bounds.clamp(&mut s);
            starts.push(s);
        }
    }
    let mut rng = seeded(STARTS_SEED);
    for _ in 0..RANDOM_STARTS {
        starts.push(
            (0..n)
                .map(|i| rng.uniform_in(bounds.lower[i], bounds.upper[i]))
                .collect(),
        );
    }
    starts
}

/// Shortest distance from `point` to `{x in bounds : g(x) = 0}`.
///
/// Each start is first pulled onto the surface by Gauss-Newton steps on `g`,
/// then refined by damped Newton iterations on the stationarity system of
/// `|x - point|^2 / 2 + lambda g(x)` with coordinates at an active bound held
/// fixed. Every surface point visited is a valid upper bound, so the answer
/// is the smallest distance seen. Infinity when no start reaches the surface.
pub fn quadratic_distance(qc: &QuadraticConstraint, point: &[f64], bounds: &Bounds) -> f64 {
    if qc.value(point).abs() <= SURFACE_TOLERANCE {
        return 0.0;
    }
    start_points(point, bounds)
        .into_iter()
        .filter_map(|s| minimize_from(qc, point, bounds, s))
        .fold(f64::INFINITY, f64::min)
}

/// Distance from `point` to either kind of constraint surface.
pub fn constraint_distance(c: &Constraint, point: &[f64], bounds: &Bounds) -> f64 {
    match c {
        Constraint::Linear(lc) => linear_distance(lc, point),
        Constraint::Quadratic(qc) => quadratic_distance(qc, point, bounds),
    }
}

fn gradient(qc: &QuadraticConstraint, x: &[f64], out: &mut [f64]) {
    for ((o, [q, l]), x) in out.iter_mut().zip(&qc.pairs).zip(x) {
        *o = 2.0 * q * x + l;
    }
}

fn distance(x: &[f64], p: &[f64]) -> f64 {
    x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn project(qc: &QuadraticConstraint, x: &mut [f64], bounds: &Bounds, grad: &mut [f64]) -> bool {
    for _ in 0..MAX_ITERATIONS {
        let g = qc.value(x);
        if g.abs() <= NEWTON_TOLERANCE {
            return true;
        }
        gradient(qc, x, grad);
        let norm2: f64 = grad.iter().map(|v| v * v).sum();
        if norm2 == 0.0 {
            break;
        }
        let before = x.to_vec();
        for (xi, gi) in x.iter_mut().zip(grad.iter()) {
            *xi -= g / norm2 * gi;
        }
        bounds.clamp(x);
        if x == before.as_slice() {
            break;
        }
    }
    qc.value(x).abs() <= SURFACE_TOLERANCE
}

struct Kkt {
    free: Vec<usize>,
    residual: Vec<f64>,
    norm: f64,
}

// Residual of the stationarity system at (x, lambda). A coordinate sitting
// on a bound is held there while the Lagrangian gradient pushes outward.
fn kkt(qc: &QuadraticConstraint, x: &[f64], lambda: f64, p: &[f64], bounds: &Bounds) -> Kkt {
    let mut free = Vec::with_capacity(x.len());
    let mut residual = Vec::with_capacity(x.len() + 1);
    for (i, [q, l]) in qc.pairs.iter().enumerate() {
        let r = x[i] - p[i] + lambda * (2.0 * q * x[i] + l);
        let held = (x[i] <= bounds.lower[i] && r > 0.0) || (x[i] >= bounds.upper[i] && r < 0.0);
        if !held {
            free.push(i);
            residual.push(r);
        }
    }
    residual.push(qc.value(x));
    let norm = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
    Kkt { free, residual, norm }
}

fn minimize_from(qc: &QuadraticConstraint, p: &[f64], bounds: &Bounds, mut x: Vec<f64>) -> Option<f64> {
    let n = x.len();
    let mut grad = vec![0.0; n];
    bounds.clamp(&mut x);
    if !project(qc, &mut x, bounds, &mut grad) {
        return None;
    }
    let mut best = distance(&x, p);

    gradient(qc, &x, &mut grad);
    let gg: f64 = grad.iter().map(|v| v * v).sum();
    let gd: f64 = grad.iter().zip(&x).zip(p).map(|((g, x), p)| g * (x - p)).sum();
    let mut lambda = if gg > 0.0 { -gd / gg } else { 0.0 };

    let mut state = kkt(qc, &x, lambda, p, bounds);
    for _ in 0..MAX_ITERATIONS {
        if state.norm <= NEWTON_TOLERANCE || state.free.is_empty() {
            break;
        }
        let k = state.free.len();
        gradient(qc, &x, &mut grad);
        let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
        for (row, &i) in state.free.iter().enumerate() {
            m[(row, row)] = 1.0 + 2.0 * lambda * qc.pairs[i][0];
            m[(row, k)] = grad[i];
            m[(k, row)] = grad[i];
        }
        let rhs = -DVector::from_column_slice(&state.residual);
        let Some(step) = m.lu().solve(&rhs) else {
            break;
        };

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut y = x.clone();
            for (row, &i) in state.free.iter().enumerate() {
                y[i] += t * step[row];
            }
            bounds.clamp(&mut y);
            let mu = lambda + t * step[k];
            let next = kkt(qc, &y, mu, p, bounds);
            if next.norm < (1.0 - 1e-4 * t) * state.norm {
                accepted = Some((y, mu, next));
                break;
            }
            t *= 0.5;
        }
        let Some((y, mu, next)) = accepted else {
            break;
        };
        x = y;
        lambda = mu;
        state = next;
        if qc.value(&x).abs() <= SURFACE_TOLERANCE {
            best = best.min(distance(&x, p));
        }
    }
    Some(best)
}
