use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::fmt::fmt_g;

use super::{evolve_in_place, expected_energy, CostDiagonal, QaoaParams, StateVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapePoint {
    pub beta: f64,
    pub gamma: f64,
    pub f: f64,
}

/// Depth-one objective on a `resolution x resolution` grid spanning
/// `[-pi, pi]^2`, row-major with `beta` as the outer index.
pub fn landscape_grid(d: &CostDiagonal, resolution: usize) -> Result<Vec<LandscapePoint>> {
    if resolution < 2 {
        return Err(Error::invalid(format!("landscape resolution must be >= 2, got {resolution}")));
    }
    let axis: Vec<f64> = (0..resolution).map(|k| -PI + 2.0 * PI * k as f64 / (resolution - 1) as f64).collect();
    let mut state = StateVector::plus_state(d.n())?;
    let mut out = Vec::with_capacity(resolution * resolution);
    for &beta in &axis {
        for &gamma in &axis {
            evolve_in_place(&mut state, d, &QaoaParams { beta: vec![beta], gamma: vec![gamma] })?;
            out.push(LandscapePoint { beta, gamma, f: expected_energy(&state, d)? });
        }
    }
    Ok(out)
}

pub fn write_landscape_csv<W: Write>(points: &[LandscapePoint], mut w: W) -> Result<()> {
    writeln!(w, "beta,gamma,f")?;
    for p in points {
        writeln!(w, "{},{},{}", fmt_g(p.beta, 12), fmt_g(p.gamma, 12), fmt_g(p.f, 12))?;
    }
    Ok(())
}
