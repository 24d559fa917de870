use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use log::warn;

use super::{write_file, ExperimentPlan, RunRecord};
use crate::error::Result;
use crate::evolver::Direction;
use crate::features::FeatureVector;
use crate::problem::ObjectiveKind;

/// One (objective, template, direction) cell of a plan.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellKey {
    pub objective: ObjectiveKind,
    pub template: String,
    pub direction: Direction,
}

/// Linear-interpolation quantile (type 7) of an ascending slice.
///
/// Infinite values are allowed; the interpolation between two equal
/// infinities returns that infinity rather than NaN.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty set");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// `None` for an empty input.
pub fn summary(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(Summary {
        count: v.len(),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        min: v[0],
        q1: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        q3: quantile(&v, 0.75),
        max: v[v.len() - 1],
    })
}

fn num(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        v.to_string()
    }
}

/// Report tables as CSV text, keyed by file name.
#[derive(Debug, Clone, Default)]
pub struct Report {
    /// Runs in report order: plan cell order, then seed.
    pub runs: Vec<RunRecord>,
    pub files: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        for (name, text) in &self.files {
            write_file(&dir.join(name), text)?;
        }
        Ok(())
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(String::as_str)
    }
}

/// Builds every report table from the completed runs of `plan`.
///
/// Files: `runs.csv`, `fen.csv`, `feasibility.csv`, `angles.csv` (all-linear
/// templates only, median over runs), `boxplot.csv` (coefficient standard
/// deviation and shortest distance per constraint), `warnings.csv`, and one
/// `features_<objective>_<template>.csv` per objective and template.
pub fn summarize(plan: &ExperimentPlan, runs: &[RunRecord]) -> Report {
    let cells = plan.cells();
    let rank = |r: &RunRecord| cells.iter().position(|c| *c == r.cell()).unwrap_or(usize::MAX);
    let mut sorted: Vec<RunRecord> = runs.to_vec();
    sorted.sort_by_key(|r| (rank(r), r.seed, r.run));

    let mut fen = String::from("objective,template,direction,mean_fen,median_fen,q1,q3\n");
    let mut feas =
        String::from("objective,template,constraint_count,direction,mean_ratio,median_ratio,q1,q3\n");
    let mut angles = String::from("objective,template,direction,pair,median_angle,present_runs\n");
    let mut boxes = String::from("objective,template,direction,feature,constraint,min,q1,median,q3,max\n");
    let mut warnings = Vec::new();

    for cell in &cells {
        let rows: Vec<&RunRecord> = sorted.iter().filter(|r| r.cell() == *cell).collect();
        let prefix = format!("{},{},{}", cell.objective, cell.template, cell.direction);
        let fens: Vec<f64> = rows.iter().map(|r| r.final_fen).collect();
        let Some(s) = summary(&fens) else {
            warnings.push(format!("{prefix},no completed runs"));
            continue;
        };
        writeln!(fen, "{prefix},{},{},{},{}", num(s.mean), num(s.median), num(s.q1), num(s.q3)).unwrap();

        let ratios: Vec<f64> = rows.iter().map(|r| r.features.ratio).collect();
        let s = summary(&ratios).expect("cell has runs");
        writeln!(
            feas,
            "{},{},{},{},{},{},{},{}",
            cell.objective,
            cell.template,
            cell.template.len(),
            cell.direction,
            num(s.mean),
            num(s.median),
            num(s.q1),
            num(s.q3)
        )
        .unwrap();

        let k = cell.template.len();
        if cell.template.chars().all(|c| c == 'L') {
            for (p, pair) in rows[0].features.angles.iter().enumerate() {
                let present: Vec<f64> = rows
                    .iter()
                    .filter_map(|r| r.features.angles.get(p).and_then(|a| a.degrees))
                    .collect();
                let name = format!("{}_{}", pair.i + 1, pair.j + 1);
                match summary(&present) {
                    Some(s) => {
                        writeln!(angles, "{prefix},{name},{},{}", num(s.median), s.count).unwrap()
                    }
                    None => warnings.push(format!("{prefix},angle {name} missing in every run")),
                }
            }
        }

        for c in 0..k {
            let sds: Vec<f64> = rows.iter().map(|r| r.features.stats[c].all.sd).collect();
            let dists: Vec<f64> = rows.iter().map(|r| r.features.distances[c]).collect();
            for (feature, values) in [("sd", sds), ("dist", dists)] {
                let s = summary(&values).expect("cell has runs");
                writeln!(
                    boxes,
                    "{prefix},{feature},{},{},{},{},{},{}",
                    c + 1,
                    num(s.min),
                    num(s.q1),
                    num(s.median),
                    num(s.q3),
                    num(s.max)
                )
                .unwrap();
            }
        }
    }

    let mut runs_csv = String::from("objective,template,direction,run,seed,final_fen,ratio,mean_distance\n");
    for r in &sorted {
        let d = &r.features.distances;
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        writeln!(
            runs_csv,
            "{},{},{},{},{},{},{},{}",
            r.objective,
            r.template,
            r.direction,
            r.run,
            r.seed,
            num(r.final_fen),
            num(r.features.ratio),
            num(mean)
        )
        .unwrap();
    }

    let mut files = BTreeMap::new();
    for objective in &plan.objectives {
        for t in &plan.constraint_templates {
            let key = crate::evolver::template_key(t);
            let mut text = FeatureVector::csv_header_for(t.len());
            text.push('\n');
            for r in sorted.iter().filter(|r| r.objective == *objective && r.template == key) {
                text.push_str(&r.features.csv_row(&r.name()));
                text.push('\n');
            }
            files.insert(format!("features_{objective}_{key}.csv"), text);
        }
    }

    let mut warn_csv = String::from("objective,template,direction,message\n");
    for w in &warnings {
        warn!("{w}");
        warn_csv.push_str(w);
        warn_csv.push('\n');
    }
    files.insert("runs.csv".into(), runs_csv);
    files.insert("fen.csv".into(), fen);
    files.insert("feasibility.csv".into(), feas);
    files.insert("angles.csv".into(), angles);
    files.insert("boxplot.csv".into(), boxes);
    files.insert("warnings.csv".into(), warn_csv);
    Report {
        runs: sorted,
        files,
        warnings,
    }
}
