//! Constrained optimization problem instances and their evaluation.
//!
//! An instance pairs one of four benchmark objectives with box bounds and an
//! ordered list of linear or univariate quadratic inequality constraints
//! `g(x) <= 0`. All objectives are shifted so that the origin is the global
//! minimizer with value exactly zero.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Tolerance used when an equality constraint is relaxed to an inequality.
pub const DEFAULT_EQUALITY_TOLERANCE: f64 = 1e-4;

/// Default half-range of each decision variable.
pub const DEFAULT_VARIABLE_BOUND: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = Self { lower, upper };
        b.validate()?;
        Ok(b)
    }

    /// The same `[lo, hi]` interval in every one of `n` dimensions.
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    /// `[-5, 5]^n`.
    pub fn symmetric_default(n: usize) -> Result<Self> {
        Self::uniform(n, -DEFAULT_VARIABLE_BOUND, DEFAULT_VARIABLE_BOUND)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(!self.lower.is_empty(), || "bounds must have at least one dimension".into())?;
        ensure(self.lower.len() == self.upper.len(), || {
            format!(
                "bounds length mismatch: {} lower vs {} upper",
                self.lower.len(),
                self.upper.len()
            )
        })?;
        for (i, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            ensure(l.is_finite() && u.is_finite() && l < u, || {
                format!("bounds[{i}]: need finite lower < upper, got [{l}, {u}]")
            })?;
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }
}

/// `g(x) = b + sum_i a_i x_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub b: f64,
    pub a: Vec<f64>,
}

/// `g(x) = b + sum_i (q_i x_i^2 + l_i x_i)`, stored as `(q_i, l_i)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticConstraint {
    pub b: f64,
    pub pairs: Vec<[f64; 2]>,
}

impl LinearConstraint {
    pub fn new(b: f64, a: Vec<f64>) -> Self {
        Self { b, a }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.b + self.a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>()
    }
}

impl QuadraticConstraint {
    pub fn new(b: f64, pairs: Vec<[f64; 2]>) -> Self {
        Self { b, pairs }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.b
            + self
                .pairs
                .iter()
                .zip(x)
                .map(|([q, l], x)| (q * x + l) * x)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Linear,
    Quadratic,
}

impl ConstraintKind {
    /// Number of coefficients excluding the offset.
    pub fn coefficient_count(self, n: usize) -> usize {
        match self {
            ConstraintKind::Linear => n,
            ConstraintKind::Quadratic => 2 * n,
        }
    }

    pub fn letter(self) -> char {
        match self {
            ConstraintKind::Linear => 'L',
            ConstraintKind::Quadratic => 'Q',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'L' => Some(ConstraintKind::Linear),
            'Q' => Some(ConstraintKind::Quadratic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Constraint {
    Linear(LinearConstraint),
    Quadratic(QuadraticConstraint),
}

impl Constraint {
    pub fn kind(&self) -> ConstraintKind {
        match self {
            Constraint::Linear(_) => ConstraintKind::Linear,
            Constraint::Quadratic(_) => ConstraintKind::Quadratic,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Constraint::Linear(c) => c.a.len(),
            Constraint::Quadratic(c) => c.pairs.len(),
        }
    }

    pub fn offset(&self) -> f64 {
        match self {
            Constraint::Linear(c) => c.b,
            Constraint::Quadratic(c) => c.b,
        }
    }

    /// Raw `g(x)` without the dimension check.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Constraint::Linear(c) => c.value(x),
            Constraint::Quadratic(c) => c.value(x),
        }
    }

    /// Writes `grad g(x)` into `out`.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Constraint::Linear(c) => out.copy_from_slice(&c.a),
            Constraint::Quadratic(c) => {
                for ((o, [q, l]), x) in out.iter_mut().zip(&c.pairs).zip(x) {
                    *o = 2.0 * q * x + l;
                }
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dimension()];
        self.gradient_into(x, &mut g);
        g
    }

    /// Offset followed by the coefficients in storage order:
    /// `(b, a_1..a_n)` or `(b, q_1, l_1, .., q_n, l_n)`.
    pub fn genes(&self) -> Vec<f64> {
        let mut out = vec![self.offset()];
        match self {
            Constraint::Linear(c) => out.extend_from_slice(&c.a),
            Constraint::Quadratic(c) => out.extend(c.pairs.iter().flatten()),
        }
        out
    }
}

/// Evaluates `g(x)`, checking that the dimensions agree.
pub fn evaluate_constraint(c: &Constraint, x: &[f64]) -> Result<f64> {
    ensure(c.dimension() == x.len(), || {
        format!("constraint has dimension {} but point has {}", c.dimension(), x.len())
    })?;
    Ok(c.value(x))
}

/// Relaxes an equality residual `h(x)` into `|h(x)| - tol <= 0`.
pub fn transform_equality(h_value: f64, tol: f64) -> Result<f64> {
    ensure(tol > 0.0, || format!("equality tolerance must be positive, got {tol}"))?;
    Ok(h_value.abs() - tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectiveKind {
    Sphere,
    Ackley,
    Rosenbrock,
    Schaffer,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 4] = [
        ObjectiveKind::Sphere,
        ObjectiveKind::Ackley,
        ObjectiveKind::Rosenbrock,
        ObjectiveKind::Schaffer,
    ];

    /// Objective value without a dimension check.
    pub fn value(self, x: &[f64]) -> f64 {
        match self {
            ObjectiveKind::Sphere => x.iter().map(|v| v * v).sum(),
            ObjectiveKind::Ackley => ackley(x),
            ObjectiveKind::Rosenbrock => x
                .windows(2)
                .map(|w| {
                    let (u, v) = (w[0] + 1.0, w[1] + 1.0);
                    100.0 * (v - u * u).powi(2) + w[0] * w[0]
                })
                .sum(),
            ObjectiveKind::Schaffer => x
                .windows(2)
                .map(|w| {
                    let s = w[0] * w[0] + w[1] * w[1];
                    let sin = s.sqrt().sin();
                    0.5 + (sin * sin - 0.5) / (1.0 + 0.001 * s).powi(2)
                })
                .sum(),
        }
    }
}

// Written with expm1 and 2 sin^2(pi x) = 1 - cos(2 pi x) so the value is
// exactly zero at the origin and keeps full precision next to it.
fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let cos_deficit = x
        .iter()
        .map(|v| {
            let s = (PI * v).sin();
            2.0 * s * s
        })
        .sum::<f64>()
        / n;
    -20.0 * (-0.2 * rms).exp_m1() - E * (-cos_deficit).exp_m1()
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ObjectiveKind::Sphere => "Sphere",
            ObjectiveKind::Ackley => "Ackley",
            ObjectiveKind::Rosenbrock => "Rosenbrock",
            ObjectiveKind::Schaffer => "Schaffer",
        };
        f.write_str(s)
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObjectiveKind::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::contract(format!("unknown objective '{s}'")))
    }
}

pub fn evaluate_objective(kind: ObjectiveKind, x: &[f64], n: usize) -> Result<f64> {
    ensure(x.len() == n, || format!("objective expects dimension {n}, got {}", x.len()))?;
    Ok(kind.value(x))
}

/// A constrained optimization problem: minimize the objective over the box
/// subject to every `g_i(x) <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopInstance {
    pub objective: ObjectiveKind,
    pub dimension: usize,
    pub bounds: Bounds,
    pub constraints: Vec<Constraint>,
}

impl CopInstance {
    pub fn new(
        objective: ObjectiveKind,
        bounds: Bounds,
        constraints: Vec<Constraint>,
    ) -> Result<Self> {
        let inst = Self {
            objective,
            dimension: bounds.dimension(),
            bounds,
            constraints,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.dimension >= 1, || "dimension must be at least 1".into())?;
        self.bounds.validate()?;
        ensure(self.bounds.dimension() == self.dimension, || {
            format!(
                "bounds have dimension {} but instance declares {}",
                self.bounds.dimension(),
                self.dimension
            )
        })?;
        for (i, c) in self.constraints.iter().enumerate() {
            ensure(c.dimension() == self.dimension, || {
                format!(
                    "constraint {i} has dimension {} but instance declares {}",
                    c.dimension(),
                    self.dimension
                )
            })?;
        }
        ensure(self.bounds.contains(&self.optimum()), || {
            "the origin must lie inside the variable bounds".into()
        })
    }

    /// The known unconstrained optimum, the origin.
    pub fn optimum(&self) -> Vec<f64> {
        vec![0.0; self.dimension]
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        ensure(x.len() == self.dimension, || {
            format!("instance has dimension {} but point has {}", self.dimension, x.len())
        })
    }

    pub fn objective_value(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.objective.value(x))
    }

    /// Sum of positive constraint parts, `sum_i max(0, g_i(x))`.
    pub fn violation(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.violation_unchecked(x))
    }

    #[inline]
    pub fn violation_unchecked(&self, x: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c.value(x).max(0.0)).sum()
    }

    /// `(f(x), phi(x))` without the dimension check.
    #[inline]
    pub fn evaluate_unchecked(&self, x: &[f64]) -> (f64, f64) {
        (self.objective.value(x), self.violation_unchecked(x))
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        self.constraints.iter().all(|c| c.value(x) <= 0.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: CopInstance = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }
}

/// Convenience wrapper matching [`CopInstance::violation`].
pub fn violation(instance: &CopInstance, x: &[f64]) -> Result<f64> {
    instance.violation(x)
}
