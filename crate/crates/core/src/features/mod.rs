//! Constraint features of an instance: coefficient statistics, shortest
//! distance from the optimum to each constraint surface, pairwise angles
//! between constraint normals, and the feasible share of the optimum's
//! vicinity.

mod angle;
mod distance;
mod sampling;
mod stats;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use angle::{nearest_intersection, pairwise_angle, INTERSECTION_TOLERANCE};
pub use distance::{constraint_distance, linear_distance, quadratic_distance, SURFACE_TOLERANCE};
pub use sampling::{
    feasibility_ratio, feasibility_ratio_sharded, feasible_fraction, vicinity_box, DEFAULT_SAMPLE_COUNT,
};
pub use stats::{coeff_stats, constraint_stats, CoeffStats, ConstraintStats};

use crate::error::Result;
use crate::problem::CopInstance;
use crate::rng::RandomStream;

/// Angle between constraints `i < j` (0-based). `None` when missing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairAngle {
    pub i: usize,
    pub j: usize,
    pub degrees: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub constraint_count: usize,
    pub ratio: f64,
    /// Per constraint; infinity when the surface is out of reach. JSON has
    /// no infinity, so it is stored as the string `"inf"`.
    #[serde(with = "inf_as_string")]
    pub distances: Vec<f64>,
    pub stats: Vec<ConstraintStats>,
    /// Upper triangle in row order: (0,1), (0,2), .., (1,2), ..
    pub angles: Vec<PairAngle>,
}

pub fn feature_vector<R: RandomStream + ?Sized>(
    instance: &CopInstance,
    sample_count: usize,
    rng: &mut R,
) -> Result<FeatureVector> {
    instance.validate()?;
    let x = instance.optimum();
    let b = &instance.bounds;
    let cs = &instance.constraints;
    let k = cs.len();
    let mut angles = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            angles.push(PairAngle {
                i,
                j,
                degrees: pairwise_angle(&cs[i], &cs[j], &x, b),
            });
        }
    }
    Ok(FeatureVector {
        constraint_count: k,
        ratio: feasibility_ratio(instance, sample_count, rng)?,
        distances: cs.iter().map(|c| constraint_distance(c, &x, b)).collect(),
        stats: cs.iter().map(constraint_stats).collect::<Result<_>>()?,
        angles,
    })
}

mod inf_as_string {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Value {
        Finite(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|x| {
                if x.is_finite() {
                    Value::Finite(*x)
                } else {
                    Value::Text("inf".into())
                }
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Value>::deserialize(d)?
            .into_iter()
            .map(|v| match v {
                Value::Finite(x) => Ok(x),
                Value::Text(t) if t == "inf" => Ok(f64::INFINITY),
                Value::Text(t) => Err(serde::de::Error::custom(format!("unexpected distance '{t}'"))),
            })
            .collect()
    }
}

fn cell(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        v.to_string()
    }
}

impl FeatureVector {
    /// CSV header for a vector with `k` constraints.
    pub fn csv_header_for(k: usize) -> String {
        let mut h = String::from("instance_id,constraint_count,ratio");
        for prefix in ["dist", "sd", "psd", "var"] {
            for i in 1..=k {
                write!(h, ",{prefix}_{i}").unwrap();
            }
        }
        for i in 1..=k {
            for j in i + 1..=k {
                write!(h, ",angle_{i}_{j}").unwrap();
            }
        }
        h
    }

    pub fn csv_header(&self) -> String {
        Self::csv_header_for(self.constraint_count)
    }

    /// One CSV row. Infinite distances print as `inf`, missing angles as
    /// empty cells.
    pub fn csv_row(&self, instance_id: &str) -> String {
        let mut row = format!("{instance_id},{},{}", self.constraint_count, cell(self.ratio));
        for d in &self.distances {
            write!(row, ",{}", cell(*d)).unwrap();
        }
        for pick in [|s: &CoeffStats| s.sd, |s: &CoeffStats| s.psd, |s: &CoeffStats| s.var] {
            for s in &self.stats {
                write!(row, ",{}", cell(pick(&s.all))).unwrap();
            }
        }
        for a in &self.angles {
            row.push(',');
            if let Some(d) = a.degrees {
                row.push_str(&cell(d));
            }
        }
        row
    }
}
