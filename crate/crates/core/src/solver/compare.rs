//! Epsilon-level comparison and the epsilon schedule.

use std::cmp::Ordering;

use crate::error::{ensure, Result};

#[inline]
fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Strict epsilon-level relation `lhs <_eps rhs` on `(f, phi)` pairs.
#[inline]
pub fn eps_less(lhs: (f64, f64), rhs: (f64, f64), eps: f64) -> bool {
    let ((f1, p1), (f2, p2)) = (lhs, rhs);
    if (p1 <= eps && p2 <= eps) || p1 == p2 {
        f1 < f2
    } else {
        p1 < p2
    }
}

/// Non-strict relation `lhs <=_eps rhs`.
#[inline]
pub fn eps_less_eq(lhs: (f64, f64), rhs: (f64, f64), eps: f64) -> bool {
    let ((f1, p1), (f2, p2)) = (lhs, rhs);
    if (p1 <= eps && p2 <= eps) || p1 == p2 {
        f1 <= f2
    } else {
        p1 < p2
    }
}

/// Total order equivalent to the epsilon-level comparison at a fixed `eps`:
/// violations at or below `eps` collapse to zero, then `(phi, f)` is compared
/// lexicographically. Used for sorting.
#[inline]
pub fn eps_order(lhs: (f64, f64), rhs: (f64, f64), eps: f64) -> Ordering {
    let clip = |p: f64| if p <= eps { 0.0 } else { p };
    cmp_f64(clip(lhs.1), clip(rhs.1)).then_with(|| cmp_f64(lhs.0, rhs.0))
}

/// Compares two `(f, phi)` candidates under the epsilon level `eps`.
///
/// `Less` means `lhs` is strictly better. `Equal` is returned when neither is
/// strictly better than the other.
pub fn epsilon_compare(lhs: (f64, f64), rhs: (f64, f64), eps: f64) -> Result<Ordering> {
    ensure(eps >= 0.0, || format!("epsilon level must be non-negative, got {eps}"))?;
    ensure(lhs.1 >= 0.0 && rhs.1 >= 0.0, || {
        format!("violations must be non-negative, got {} and {}", lhs.1, rhs.1)
    })?;
    Ok(if eps_less(lhs, rhs, eps) {
        Ordering::Less
    } else if eps_less(rhs, lhs, eps) {
        Ordering::Greater
    } else {
        Ordering::Equal
    })
}

/// `eps0 * (1 - t/tc)^cp` for `t < tc`, zero afterwards.
pub fn epsilon_schedule(t: u64, eps0: f64, tc: u64, cp: f64) -> f64 {
    if tc == 0 || t >= tc {
        return 0.0;
    }
    eps0 * (1.0 - t as f64 / tc as f64).powf(cp)
}

/// Violation of the `ceil(q * M)`-th smallest violation among `phis`.
pub fn initial_epsilon(phis: &[f64], q: f64) -> Result<f64> {
    ensure(!phis.is_empty(), || "initial epsilon needs a non-empty archive".into())?;
    ensure(q > 0.0 && q <= 1.0, || format!("level fraction must lie in (0, 1], got {q}"))?;
    let mut sorted = phis.to_vec();
    sorted.sort_by(|a, b| cmp_f64(*a, *b));
    let m = sorted.len();
    // the small slack keeps e.g. 0.9 * 10 from rounding up to rank 10
    let rank = ((q * m as f64) - 1e-9).ceil().clamp(1.0, m as f64) as usize;
    Ok(sorted[rank - 1])
}
