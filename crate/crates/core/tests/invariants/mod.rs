//! Property checks shared by the `properties` and `acceptance` targets.
//!
//! Each check drives a deterministic proptest runner and returns the first
//! failure as text, so callers can assert on it or report it.

#![allow(dead_code)]

use std::cmp::Ordering;

use cevo_core::evolver::{
    decode, evolve_observed, random_genome, ConstraintGenome, Direction, EvolverConfig, GenomeSpec,
};
use cevo_core::features::{
    feasibility_ratio, feasible_fraction, feature_vector, linear_distance, pairwise_angle, quadratic_distance,
    FeatureVector, PairAngle, SURFACE_TOLERANCE,
};
use cevo_core::harness::{quantile, summarize, ExperimentPlan, RunRecord};
use cevo_core::problem::{evaluate_constraint, evaluate_objective};
use cevo_core::rng::{seeded, RandomStream, SeededRng};
use cevo_core::solver::{eps_less_eq, epsilon_compare, epsilon_schedule};
use cevo_core::{
    solve, solve_observed, Bounds, Constraint, CopInstance, Individual, LinearConstraint, ObjectiveKind,
    QuadraticConstraint, SolveStatus, SolverConfig,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};

pub type Check = fn() -> Result<(), String>;

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    let mut runner = TestRunner::new_with_rng(config, rng);
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn random_constraint(rng: &mut SeededRng, n: usize) -> Constraint {
    let b = rng.uniform_in(-5.0, 5.0);
    if rng.index(2) == 0 {
        Constraint::Linear(LinearConstraint::new(b, (0..n).map(|_| rng.uniform_in(-5.0, 5.0)).collect()))
    } else {
        Constraint::Quadratic(QuadraticConstraint::new(
            b,
            (0..n).map(|_| [rng.uniform_in(-5.0, 5.0), rng.uniform_in(-5.0, 5.0)]).collect(),
        ))
    }
}

fn random_instance(seed: u64, max_n: usize, max_k: usize) -> CopInstance {
    let mut rng = seeded(seed);
    let n = 1 + rng.index(max_n);
    let k = 1 + rng.index(max_k);
    let objective = ObjectiveKind::ALL[rng.index(4)];
    let constraints = (0..k).map(|_| random_constraint(&mut rng, n)).collect();
    CopInstance::new(objective, Bounds::symmetric_default(n).unwrap(), constraints).unwrap()
}

fn random_point(rng: &mut SeededRng, b: &Bounds) -> Vec<f64> {
    (0..b.dimension()).map(|i| rng.uniform_in(b.lower[i], b.upper[i])).collect()
}

fn small_solver(n: usize) -> SolverConfig {
    SolverConfig {
        population_size: 8,
        archive_size: 20,
        generations: 150,
        epsilon_control_generation: 100,
        fen_max: 1500,
        ..SolverConfig::desk(n)
    }
}

// problem ------------------------------------------------------------------

pub fn objective_zero_at_origin() -> Result<(), String> {
    for kind in ObjectiveKind::ALL {
        for n in [2, 5, 10, 30] {
            let v = evaluate_objective(kind, &vec![0.0; n], n).map_err(|e| e.to_string())?;
            if v != 0.0 {
                return Err(format!("{kind} at the origin in {n} dimensions gave {v}"));
            }
        }
    }
    Ok(())
}

pub fn violation_matches_brute_force() -> Result<(), String> {
    run(30, any::<u64>(), |seed| {
        let inst = random_instance(seed, 6, 5);
        let mut rng = seeded(seed ^ 1);
        for _ in 0..1000 {
            let x = random_point(&mut rng, &inst.bounds);
            let mut total = 0.0;
            let mut feasible = true;
            for c in &inst.constraints {
                let g = match c {
                    Constraint::Linear(l) => l.b + l.a.iter().zip(&x).map(|(a, x)| a * x).sum::<f64>(),
                    Constraint::Quadratic(q) => {
                        q.b + q.pairs.iter().zip(&x).map(|(p, x)| p[0] * x * x + p[1] * x).sum::<f64>()
                    }
                };
                if g > 0.0 {
                    total += g;
                    feasible = false;
                }
            }
            let phi = inst.violation(&x).unwrap();
            prop_assert!(phi >= 0.0);
            prop_assert!((phi - total).abs() <= 1e-12 * (1.0 + total));
            prop_assert_eq!(phi == 0.0, feasible);
            prop_assert_eq!(inst.is_feasible(&x), feasible);
        }
        Ok(())
    })
}

pub fn linear_is_affine() -> Result<(), String> {
    run(500, (any::<u64>(), 0.0..=1.0f64), |(seed, alpha)| {
        let mut rng = seeded(seed);
        let n = 1 + rng.index(10);
        let lc = LinearConstraint::new(rng.uniform_in(-5.0, 0.0), (0..n).map(|_| rng.uniform_in(-5.0, 5.0)).collect());
        let c = Constraint::Linear(lc);
        let b = Bounds::symmetric_default(n).unwrap();
        let (x, y) = (random_point(&mut rng, &b), random_point(&mut rng, &b));
        let mix: Vec<f64> = x.iter().zip(&y).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect();
        let lhs = evaluate_constraint(&c, &mix).unwrap();
        let rhs = alpha * c.value(&x) + (1.0 - alpha) * c.value(&y);
        prop_assert!((lhs - rhs).abs() <= 1e-9, "{} vs {}", lhs, rhs);
        Ok(())
    })
}

pub fn quadratic_matches_direct_sum() -> Result<(), String> {
    run(500, any::<u64>(), |seed| {
        let mut rng = seeded(seed);
        let n = 1 + rng.index(30);
        let pairs: Vec<[f64; 2]> = (0..n).map(|_| [rng.uniform_in(-5.0, 5.0), rng.uniform_in(-5.0, 5.0)]).collect();
        let qc = QuadraticConstraint::new(rng.uniform_in(-5.0, 0.0), pairs.clone());
        let x: Vec<f64> = (0..n).map(|_| rng.uniform_in(-5.0, 5.0)).collect();
        let mut direct = qc.b;
        let mut scale = qc.b.abs();
        for (p, x) in pairs.iter().zip(&x) {
            let (sq, li) = (p[0] * (x * x), p[1] * x);
            direct += sq + li;
            scale += sq.abs() + li.abs();
        }
        let v = qc.value(&x);
        prop_assert!((v - direct).abs() <= 1e-12 * scale, "{} vs {}", v, direct);
        Ok(())
    })
}

// solver --------------------------------------------------------------------

fn pair_strategy() -> impl Strategy<Value = (f64, f64)> {
    let v = prop_oneof![Just(0.0), Just(1.0), 0.0..10.0f64];
    (v.clone(), v)
}

fn lexicographic(a: (f64, f64), b: (f64, f64)) -> Ordering {
    a.1.partial_cmp(&b.1).unwrap().then(a.0.partial_cmp(&b.0).unwrap())
}

pub fn eps_zero_is_lexicographic() -> Result<(), String> {
    run(10_000, (pair_strategy(), pair_strategy()), |(a, b)| {
        prop_assert_eq!(epsilon_compare(a, b, 0.0).unwrap(), lexicographic(a, b));
        Ok(())
    })
}

pub fn eps_infinite_orders_by_f() -> Result<(), String> {
    run(10_000, (pair_strategy(), pair_strategy()), |(a, b)| {
        prop_assert_eq!(epsilon_compare(a, b, f64::INFINITY).unwrap(), a.0.partial_cmp(&b.0).unwrap());
        Ok(())
    })
}

pub fn eps_total_preorder() -> Result<(), String> {
    let eps = prop_oneof![Just(0.0), Just(1.0), 0.0..10.0f64];
    run(10_000, (pair_strategy(), pair_strategy(), pair_strategy(), eps), |(a, b, c, e)| {
        let cmp = |x, y| epsilon_compare(x, y, e).unwrap();
        prop_assert_eq!(cmp(a, b), cmp(b, a).reverse());
        prop_assert_eq!(cmp(a, a), Ordering::Equal);
        if cmp(a, b).is_le() && cmp(b, c).is_le() {
            prop_assert!(cmp(a, c).is_le());
        }
        if cmp(a, b).is_lt() && cmp(b, c).is_le() {
            prop_assert!(cmp(a, c).is_lt());
        }
        Ok(())
    })
}

pub fn schedule_monotone_and_zero_at_tc() -> Result<(), String> {
    run(500, (0.0..1e3f64, 1u64..2000, 0.0..10.0f64), |(eps0, tc, cp)| {
        let mut prev = f64::INFINITY;
        for t in 0..=tc + 5 {
            let e = epsilon_schedule(t, eps0, tc, cp);
            prop_assert!(e <= prev && e >= 0.0);
            prev = e;
        }
        prop_assert_eq!(epsilon_schedule(0, eps0, tc, cp), eps0);
        prop_assert_eq!(epsilon_schedule(tc, eps0, tc, cp), 0.0);
        Ok(())
    })
}

pub fn solve_is_deterministic() -> Result<(), String> {
    run(20, (any::<u64>(), any::<u64>()), |(inst_seed, seed)| {
        let inst = random_instance(inst_seed, 4, 3);
        let config = small_solver(inst.dimension);
        let a = solve(&inst, &config, seed).unwrap();
        let b = solve(&inst, &config, seed).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        Ok(())
    })
}

pub fn survivor_selection_is_elitist() -> Result<(), String> {
    run(20, (any::<u64>(), any::<u64>()), |(inst_seed, seed)| {
        let inst = random_instance(inst_seed, 4, 3);
        let config = small_solver(inst.dimension);
        let mut previous: Option<(f64, Vec<Individual>)> = None;
        let mut broken = None;
        solve_observed(&inst, &config, seed, |t, eps, pop| {
            if let Some((prev_eps, prev)) = &previous {
                for (i, (old, new)) in prev.iter().zip(pop).enumerate() {
                    if !eps_less_eq(new.key(), old.key(), *prev_eps) && broken.is_none() {
                        broken = Some(format!("generation {t}, individual {i} got worse"));
                    }
                }
            }
            previous = Some((eps, pop.to_vec()));
        })
        .unwrap();
        prop_assert!(broken.is_none(), "{:?}", broken);
        Ok(())
    })
}

pub fn fen_within_budget() -> Result<(), String> {
    run(30, (any::<u64>(), any::<u64>(), 20u64..3000), |(inst_seed, seed, fen_max)| {
        let inst = random_instance(inst_seed, 4, 3);
        let config = SolverConfig {
            fen_max,
            ..small_solver(inst.dimension)
        };
        let r = solve(&inst, &config, seed).unwrap();
        prop_assert!(r.fen <= fen_max);
        if r.status == SolveStatus::Solved {
            prop_assert!(r.best.phi == 0.0 && r.best.f.abs() <= config.success_tolerance);
        }
        Ok(())
    })
}

// evolver -------------------------------------------------------------------

fn tiny_evolver(n: usize, direction: Direction, seed: u64) -> EvolverConfig {
    EvolverConfig {
        population_size: 5,
        generations: 4,
        solver_config: SolverConfig {
            fen_max: 800,
            ..small_solver(n)
        },
        ..EvolverConfig::desk(n, direction, seed)
    }
}

fn template_strategy() -> impl Strategy<Value = String> {
    "[LQ]{1,3}"
}

pub fn evolver_keeps_genomes_valid_and_elitist() -> Result<(), String> {
    run(6, (template_strategy(), 1usize..4, any::<u64>(), any::<bool>()), |(t, n, seed, hard)| {
        let spec = GenomeSpec::new(n, cevo_core::evolver::parse_template(&t).unwrap()).unwrap();
        let bounds = Bounds::symmetric_default(n).unwrap();
        let direction = if hard { Direction::Hard } else { Direction::Easy };
        let config = tiny_evolver(n, direction, seed);
        let mut problems = Vec::new();
        let mut best_cost = f64::INFINITY;
        evolve_observed(&spec, ObjectiveKind::Sphere, &bounds, &config, |g, pop, costs| {
            for genome in pop {
                if !genome.is_valid(&spec) {
                    problems.push(format!("generation {g}: invalid genome {:?}", genome.genes()));
                }
                let inst = decode(&spec, genome, ObjectiveKind::Sphere, &bounds).unwrap();
                if !inst.is_feasible(&inst.optimum()) {
                    problems.push(format!("generation {g}: origin infeasible"));
                }
            }
            let best = costs.iter().cloned().fold(f64::INFINITY, f64::min);
            if best > best_cost {
                problems.push(format!("generation {g}: best cost rose from {best_cost} to {best}"));
            }
            best_cost = best;
        })
        .unwrap();
        prop_assert!(problems.is_empty(), "{:?}", problems);
        Ok(())
    })
}

pub fn evolver_is_deterministic() -> Result<(), String> {
    run(4, (template_strategy(), any::<u64>()), |(t, seed)| {
        let n = 2;
        let spec = GenomeSpec::new(n, cevo_core::evolver::parse_template(&t).unwrap()).unwrap();
        let bounds = Bounds::symmetric_default(n).unwrap();
        let config = tiny_evolver(n, Direction::Hard, seed);
        let a = cevo_core::evolver::evolve(&spec, ObjectiveKind::Sphere, &bounds, &config).unwrap();
        let b = cevo_core::evolver::evolve(&spec, ObjectiveKind::Sphere, &bounds, &config).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

pub fn decode_is_injective() -> Result<(), String> {
    run(500, (template_strategy(), 1usize..6, any::<u64>(), any::<bool>()), |(t, n, seed, nudge)| {
        let spec = GenomeSpec::new(n, cevo_core::evolver::parse_template(&t).unwrap()).unwrap();
        let bounds = Bounds::symmetric_default(n).unwrap();
        let mut rng = seeded(seed);
        let a = random_genome(&spec, &mut rng);
        let b = if nudge {
            let mut g = a.genes().to_vec();
            let i = rng.index(g.len());
            g[i] = if g[i] > -1.0 { g[i] - 1e-9 } else { g[i] + 1e-9 };
            ConstraintGenome(g)
        } else {
            random_genome(&spec, &mut rng)
        };
        prop_assume!(a != b);
        let ia = decode(&spec, &a, ObjectiveKind::Sphere, &bounds).unwrap();
        let ib = decode(&spec, &b, ObjectiveKind::Sphere, &bounds).unwrap();
        prop_assert_ne!(ia, ib);
        Ok(())
    })
}

// features ------------------------------------------------------------------

pub fn degenerate_quadratic_distance_is_linear() -> Result<(), String> {
    run(100, any::<u64>(), |seed| {
        let mut rng = seeded(seed);
        let n = 1 + rng.index(6);
        let a: Vec<f64> = (0..n).map(|_| rng.uniform_in(-5.0, 5.0)).collect();
        prop_assume!(a.iter().map(|v| v * v).sum::<f64>() >= 0.25);
        let b = rng.uniform_in(-5.0, 0.0);
        let lc = LinearConstraint::new(b, a.clone());
        let qc = QuadraticConstraint::new(b, a.iter().map(|v| [0.0, *v]).collect());
        // wide enough that the foot point from the origin is inside
        let bounds = Bounds::uniform(n, -20.0, 20.0).unwrap();
        let p = vec![0.0; n];
        let (dl, dq) = (linear_distance(&lc, &p), quadratic_distance(&qc, &p, &bounds));
        prop_assert!((dl - dq).abs() <= 1e-6, "{} vs {}", dl, dq);
        Ok(())
    })
}

pub fn quadratic_distance_zero_iff_on_surface() -> Result<(), String> {
    run(300, (any::<u64>(), any::<bool>()), |(seed, on_surface)| {
        let mut rng = seeded(seed);
        let n = 1 + rng.index(4);
        let bounds = Bounds::symmetric_default(n).unwrap();
        let pairs: Vec<[f64; 2]> = (0..n).map(|_| [rng.uniform_in(-5.0, 5.0), rng.uniform_in(-5.0, 5.0)]).collect();
        let p = random_point(&mut rng, &bounds);
        let mut qc = QuadraticConstraint::new(rng.uniform_in(-5.0, 0.0), pairs);
        if on_surface {
            // shift b so that p lies exactly on the surface
            qc.b -= qc.value(&p);
        }
        let g = qc.value(&p);
        let d = quadratic_distance(&qc, &p, &bounds);
        prop_assert_eq!(d == 0.0, g.abs() <= SURFACE_TOLERANCE, "g {} d {}", g, d);
        prop_assert!(d >= 0.0);
        Ok(())
    })
}

fn scaled(c: &Constraint, s: f64) -> Constraint {
    match c {
        Constraint::Linear(l) => Constraint::Linear(LinearConstraint::new(s * l.b, l.a.iter().map(|v| s * v).collect())),
        Constraint::Quadratic(q) => Constraint::Quadratic(QuadraticConstraint::new(
            s * q.b,
            q.pairs.iter().map(|p| [s * p[0], s * p[1]]).collect(),
        )),
    }
}

pub fn angle_symmetric_and_scale_invariant() -> Result<(), String> {
    run(300, (any::<u64>(), 0.1..10.0f64, 0.1..10.0f64), |(seed, s1, s2)| {
        let mut rng = seeded(seed);
        let n = 2 + rng.index(3);
        let bounds = Bounds::symmetric_default(n).unwrap();
        let mut c1 = random_constraint(&mut rng, n);
        let mut c2 = random_constraint(&mut rng, n);
        // keep the origin feasible, as for evolved constraints
        for c in [&mut c1, &mut c2] {
            match c {
                Constraint::Linear(l) => l.b = -l.b.abs(),
                Constraint::Quadratic(q) => q.b = -q.b.abs(),
            }
        }
        let o = vec![0.0; n];
        let a = pairwise_angle(&c1, &c2, &o, &bounds);
        prop_assert_eq!(a, pairwise_angle(&c2, &c1, &o, &bounds));
        if let Some(v) = a {
            prop_assert!((0.0..=90.0).contains(&v));
        }
        if let (Constraint::Linear(_), Constraint::Linear(_)) = (&c1, &c2) {
            let b = pairwise_angle(&scaled(&c1, s1), &scaled(&c2, s2), &o, &bounds);
            prop_assert!((a.unwrap() - b.unwrap()).abs() <= 1e-9);
        } else {
            // scaling leaves the surfaces, and so the intersection, unchanged
            let b = pairwise_angle(&scaled(&c1, s1), &scaled(&c2, s2), &o, &bounds);
            match (a, b) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-6, "{} vs {}", x, y),
                (None, None) => {}
                other => prop_assert!(false, "presence changed under scaling: {:?}", other),
            }
        }
        Ok(())
    })
}

pub fn feasibility_invariant_under_reordering() -> Result<(), String> {
    run(50, any::<u64>(), |seed| {
        let inst = random_instance(seed, 5, 5);
        let mut reversed = inst.clone();
        reversed.constraints.reverse();
        let mut rng = seeded(seed ^ 7);
        let points: Vec<Vec<f64>> = (0..2000).map(|_| random_point(&mut rng, &inst.bounds)).collect();
        prop_assert_eq!(feasible_fraction(&inst, &points), feasible_fraction(&reversed, &points));
        let a = feasibility_ratio(&inst, 2000, &mut seeded(seed)).unwrap();
        let b = feasibility_ratio(&reversed, 2000, &mut seeded(seed)).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

pub fn monte_carlo_variance_halves() -> Result<(), String> {
    // g = x1 + 0.4 x2 - 0.3 cuts the vicinity box [-1, 1]^2 unevenly
    let inst = CopInstance::new(
        ObjectiveKind::Sphere,
        Bounds::symmetric_default(2).unwrap(),
        vec![Constraint::Linear(LinearConstraint::new(-0.3, vec![1.0, 0.4]))],
    )
    .unwrap();
    let variance = |m: usize, salt: u64| {
        let r: Vec<f64> = (0..30)
            .map(|s| feasibility_ratio(&inst, m, &mut seeded(salt * 1000 + s)).unwrap())
            .collect();
        let mean = r.iter().sum::<f64>() / 30.0;
        r.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 29.0
    };
    for m in [1000, 4000] {
        let ratio = variance(m, 1) / variance(2 * m, 2);
        // F(29, 29) puts 99% of the mass of ratio / 2 in [0.38, 2.6]
        if !(0.76..=5.2).contains(&ratio) {
            return Err(format!("variance ratio {ratio} at {m} vs {} samples", 2 * m));
        }
    }
    Ok(())
}

pub fn feature_vector_ranges() -> Result<(), String> {
    run(30, any::<u64>(), |seed| {
        let mut inst = random_instance(seed, 4, 5);
        for c in &mut inst.constraints {
            match c {
                Constraint::Linear(l) => l.b = -l.b.abs(),
                Constraint::Quadratic(q) => q.b = -q.b.abs(),
            }
        }
        let fv = feature_vector(&inst, 1000, &mut seeded(seed)).unwrap();
        let k = inst.constraints.len();
        prop_assert_eq!(fv.constraint_count, k);
        prop_assert_eq!(fv.angles.len(), k * (k - 1) / 2);
        prop_assert!((0.0..=1.0).contains(&fv.ratio));
        prop_assert!(fv.distances.iter().all(|d| *d >= 0.0));
        prop_assert!(fv.angles.iter().all(|a| a.degrees.is_none_or(|d| (0.0..=90.0).contains(&d))));
        Ok(())
    })
}

// harness -------------------------------------------------------------------

pub fn seed_derivation_is_pure() -> Result<(), String> {
    run(200, (any::<u64>(), 0usize..5, 0usize..30), |(master, t, r)| {
        let a = ExperimentPlan::desk("a", master);
        let b = ExperimentPlan::desk("elsewhere", master);
        prop_assert_eq!(a.run_seed(0, t, r), b.run_seed(0, t, r));
        let other = ExperimentPlan::desk("a", master.wrapping_add(1));
        prop_assert_ne!(a.run_seed(0, t, r), other.run_seed(0, t, r));
        prop_assert_ne!(a.run_seed(0, t, r), a.run_seed(0, t, r + 1));
        Ok(())
    })
}

fn synthetic_run(plan: &ExperimentPlan, rng: &mut SeededRng, t: usize, direction: Direction, run: usize) -> RunRecord {
    let template = cevo_core::evolver::template_key(&plan.constraint_templates[t]);
    let k = template.len();
    let mut angles = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            angles.push(PairAngle { i, j, degrees: (rng.index(4) > 0).then(|| rng.uniform_in(0.0, 90.0)) });
        }
    }
    let fen = (rng.index(50_000) + 40) as f64;
    let stats = (0..k)
        .map(|_| cevo_core::features::constraint_stats(&random_constraint(rng, 3)).unwrap())
        .collect();
    RunRecord {
        objective: ObjectiveKind::Sphere,
        template,
        direction,
        run,
        seed: plan.run_seed(0, t, run),
        final_fen: fen,
        generations: 1,
        fitness_history: vec![fen],
        features: FeatureVector {
            constraint_count: k,
            ratio: rng.uniform(),
            distances: (0..k).map(|_| if rng.index(10) == 0 { f64::INFINITY } else { rng.uniform_in(0.0, 5.0) }).collect(),
            stats,
            angles,
        },
    }
}

pub fn report_independent_of_row_order() -> Result<(), String> {
    run(30, (any::<u64>(), any::<u64>()), |(seed, shuffle)| {
        let mut plan = ExperimentPlan::desk("out", seed);
        plan.repeats = 3;
        let mut rng = seeded(seed);
        let mut runs = Vec::new();
        for t in 0..plan.constraint_templates.len() {
            for d in Direction::BOTH {
                for r in 0..plan.repeats {
                    runs.push(synthetic_run(&plan, &mut rng, t, d, r));
                }
            }
        }
        let base = summarize(&plan, &runs);
        let mut srng = seeded(shuffle);
        for i in (1..runs.len()).rev() {
            runs.swap(i, srng.index(i + 1));
        }
        prop_assert_eq!(&summarize(&plan, &runs).files, &base.files);
        Ok(())
    })
}

// R's type 7 with 1-based positions: h = (N - 1) p + 1.
fn type7_oracle(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (v.len() as f64 - 1.0) * p + 1.0;
    let lo = h.floor() as usize;
    let below = v[lo - 1];
    let above = v[lo.min(v.len() - 1)];
    below + (h - lo as f64) * (above - below)
}

pub fn quantiles_match_oracle() -> Result<(), String> {
    let values = prop::collection::vec(prop_oneof![-1e3..1e3f64, (0i32..5).prop_map(f64::from)], 1..40);
    run(2000, (values, 0.0..=1.0f64), |(v, p)| {
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        let (got, want) = (quantile(&sorted, p), type7_oracle(&v, p));
        prop_assert!((got - want).abs() <= 1e-9 * (1.0 + want.abs()), "{} vs {}", got, want);
        Ok(())
    })
}

/// Every check with its name.
pub fn all() -> Vec<(&'static str, Check)> {
    vec![
        ("objective is zero at the origin", objective_zero_at_origin as Check),
        ("violation matches brute force", violation_matches_brute_force),
        ("linear constraints are affine", linear_is_affine),
        ("quadratic matches direct sum", quadratic_matches_direct_sum),
        ("eps=0 comparison is lexicographic", eps_zero_is_lexicographic),
        ("eps=inf comparison orders by f", eps_infinite_orders_by_f),
        ("eps comparison is a total preorder", eps_total_preorder),
        ("schedule is monotone and zero at Tc", schedule_monotone_and_zero_at_tc),
        ("solve is deterministic", solve_is_deterministic),
        ("survivor selection is elitist", survivor_selection_is_elitist),
        ("FEN stays within fen_max", fen_within_budget),
        ("evolved genomes stay valid, origin feasible, elitist", evolver_keeps_genomes_valid_and_elitist),
        ("evolver is deterministic", evolver_is_deterministic),
        ("decode is injective", decode_is_injective),
        ("degenerate quadratic distance equals linear", degenerate_quadratic_distance_is_linear),
        ("quadratic distance is zero iff on surface", quadratic_distance_zero_iff_on_surface),
        ("angles are symmetric and scale invariant", angle_symmetric_and_scale_invariant),
        ("feasibility ratio ignores constraint order", feasibility_invariant_under_reordering),
        ("Monte Carlo variance halves with doubled samples", monte_carlo_variance_halves),
        ("feature vectors respect their ranges", feature_vector_ranges),
        ("seed derivation is pure", seed_derivation_is_pure),
        ("report is independent of row order", report_independent_of_row_order),
        ("quantiles match the type 7 oracle", quantiles_match_oracle),
    ]
}
