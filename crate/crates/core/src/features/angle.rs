use std::cmp::Ordering;

use crate::features::distance::start_points;
use crate::problem::{Bounds, Constraint};
use crate::solver::pinv_solve;

/// Intersection points are accepted when `sqrt(g1^2 + g2^2) <=` this.
pub const INTERSECTION_TOLERANCE: f64 = 1e-8;

const MAX_ITERATIONS: usize = 200;

/// Angle in degrees, folded to `[0, 90]`, between the normals of two
/// constraints.
///
/// Two hyperplanes use their coefficient vectors. When a quadratic is
/// involved the normals are the gradients at the point of the two surfaces'
/// intersection nearest `point`. `None` when no intersection is found or a
/// normal vanishes.
pub fn pairwise_angle(c1: &Constraint, c2: &Constraint, point: &[f64], bounds: &Bounds) -> Option<f64> {
    // A fixed argument order makes the result exactly symmetric.
    let (c1, c2) = match compare_genes(c1, c2) {
        Ordering::Greater => (c2, c1),
        _ => (c1, c2),
    };
    match (c1, c2) {
        (Constraint::Linear(a), Constraint::Linear(b)) => normal_angle(&a.a, &b.a),
        _ => {
            let x = nearest_intersection(c1, c2, point, bounds)?;
            normal_angle(&c1.gradient(&x), &c2.gradient(&x))
        }
    }
}

fn compare_genes(c1: &Constraint, c2: &Constraint) -> Ordering {
    c1.kind().cmp(&c2.kind()).then_with(|| {
        c1.genes()
            .iter()
            .zip(c2.genes().iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

// 2 atan2(|u - v|, |u + v|) on unit normals stays accurate near 0 and 90
// degrees where acos of the cosine does not. Flipping v onto u's side folds
// the angle into [0, 90].
fn normal_angle(n1: &[f64], n2: &[f64]) -> Option<f64> {
    let norm1 = n1.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm2 = n2.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm1 == 0.0 || norm2 == 0.0 {
        return None;
    }
    let dot: f64 = n1.iter().zip(n2).map(|(a, b)| a * b).sum();
    let sign = if dot < 0.0 { -1.0 } else { 1.0 };
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in n1.iter().zip(n2) {
        let (u, v) = (a / norm1, sign * b / norm2);
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    Some((2.0 * diff.sqrt().atan2(sum.sqrt())).to_degrees())
}

/// Runs Gauss-Newton on `(g1, g2) = 0` from every start and returns the
/// accepted point closest to `point`.
pub fn nearest_intersection(
    c1: &Constraint,
    c2: &Constraint,
    point: &[f64],
    bounds: &Bounds,
) -> Option<Vec<f64>> {
    let n = point.len();
    let mut rows = vec![0.0; 2 * n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mut x in start_points(point, bounds) {
        for _ in 0..MAX_ITERATIONS {
            let r = [c1.value(&x), c2.value(&x)];
            if r[0].hypot(r[1]) <= INTERSECTION_TOLERANCE {
                break;
            }
            c1.gradient_into(&x, &mut rows[..n]);
            c2.gradient_into(&x, &mut rows[n..]);
            let step = pinv_solve(&rows, &r, 2, n);
            let before = x.clone();
            for (xi, s) in x.iter_mut().zip(step.iter()) {
                *xi -= s;
            }
            bounds.clamp(&mut x);
            if x == before {
                break;
            }
        }
        if c1.value(&x).hypot(c2.value(&x)) > INTERSECTION_TOLERANCE {
            continue;
        }
        let d: f64 = x.iter().zip(point).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, x));
        }
    }
    best.map(|(_, x)| x)
}
