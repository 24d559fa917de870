//! Constrained continuous optimization toolkit: an epsilon-constrained
//! differential evolution solver, a meta-level evolver that shapes linear and
//! quadratic constraint sets into easy or hard instances for that solver, and
//! extraction of the constraint features that track instance difficulty.

pub mod error;
pub mod problem;
pub mod rng;
pub mod solver;
pub mod evolver;
pub mod features;
pub mod harness;

pub use error::{Error, Result};
pub use problem::{
    Bounds, Constraint, ConstraintKind, CopInstance, LinearConstraint, ObjectiveKind,
    QuadraticConstraint,
};
pub use solver::{solve, solve_observed, Individual, SolveStatus, SolverConfig, SolverResult};
