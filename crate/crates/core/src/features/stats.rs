use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::problem::Constraint;

/// Spread of a coefficient list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffStats {
    /// Sample standard deviation (divisor `k - 1`).
    pub sd: f64,
    /// Population standard deviation (divisor `k`).
    pub psd: f64,
    /// Population variance, `psd^2`.
    pub var: f64,
}

/// Statistics of one constraint's coefficients. `all` covers the full gene
/// list including `b`; quadratic constraints also get the `q_i` and `l_i`
/// parts on their own when each part has at least two values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintStats {
    pub all: CoeffStats,
    pub quadratic_part: Option<CoeffStats>,
    pub linear_part: Option<CoeffStats>,
}

pub fn coeff_stats(values: &[f64]) -> Result<CoeffStats> {
    let k = values.len();
    ensure(k >= 2, || format!("coefficient statistics need at least 2 values, got {k}"))?;
    let mean = values.iter().sum::<f64>() / k as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let var = ss / k as f64;
    Ok(CoeffStats {
        sd: (ss / (k - 1) as f64).sqrt(),
        psd: var.sqrt(),
        var,
    })
}

pub fn constraint_stats(c: &Constraint) -> Result<ConstraintStats> {
    let all = coeff_stats(&c.genes())?;
    let (quadratic_part, linear_part) = match c {
        Constraint::Linear(_) => (None, None),
        Constraint::Quadratic(qc) => {
            let q: Vec<f64> = qc.pairs.iter().map(|p| p[0]).collect();
            let l: Vec<f64> = qc.pairs.iter().map(|p| p[1]).collect();
            (coeff_stats(&q).ok(), coeff_stats(&l).ok())
        }
    };
    Ok(ConstraintStats {
        all,
        quadratic_part,
        linear_part,
    })
}
