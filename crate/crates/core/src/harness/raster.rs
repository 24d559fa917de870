use std::fmt::Write as _;

use crate::error::{ensure, Error, Result};
use crate::problem::CopInstance;

/// Feasibility raster of a 2-D instance as CSV text.
///
/// Cell `(r, c)` is sampled at its center,
/// `x1 = l1 + (c + 1/2) w1 / res` and `x2 = l2 + (r + 1/2) w2 / res`, and
/// holds 1 when every `g(x) <= 0`. Rows run from the lowest `x2` upward,
/// columns from the lowest `x1`. A cell whose center lies exactly on a
/// constraint surface counts as feasible.
pub fn emit_raster(instance: &CopInstance, resolution: usize) -> Result<String> {
    instance.validate()?;
    if instance.dimension != 2 {
        return Err(Error::UnsupportedDimension(format!(
            "rasters need a 2-D instance, got dimension {}",
            instance.dimension
        )));
    }
    ensure(resolution >= 1, || "raster resolution must be at least 1".into())?;
    let b = &instance.bounds;
    let at = |i: usize, d: usize| b.lower[d] + (i as f64 + 0.5) * b.width(d) / resolution as f64;
    let mut out = String::with_capacity(resolution * resolution * 2);
    for r in 0..resolution {
        for c in 0..resolution {
            if c > 0 {
                out.push(',');
            }
            let feasible = instance.is_feasible(&[at(c, 0), at(r, 1)]);
            write!(out, "{}", u8::from(feasible)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}
