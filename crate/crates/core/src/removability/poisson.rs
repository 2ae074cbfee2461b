use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::laplacian;
use super::polar::PolarSetSpec;
use crate::error::{DbarError, Result};
use crate::grid::interp::{interpolate, Order};
use crate::grid::Field;
use crate::numeric::median;
use crate::C64;

/// Fewest trapezoid nodes on the circle.
pub const MIN_NODES: usize = 720;
const UNBOUNDED_RATIO: f64 = 1e6;
const MAX_PRINCIPLE_SLACK: f64 = 1e-6;
const HARMONIC_SLACK: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct PoissonExtension {
    #[serde(skip)]
    pub field: Field,
    /// Cells rebuilt from the boundary integral.
    #[serde(skip)]
    pub filled: Vec<bool>,
    pub filled_cells: usize,
    pub nodes: usize,
    /// Largest `|P[u] − u|` over filled cells off `E`.
    pub sup_error_off_e: f64,
}

/// Rebuild `u` inside the circle `|z − center| = radius` from its boundary
/// values by the Poisson integral. Cells at least two spacings inside the
/// circle are filled; all others keep `u`.
pub fn poisson_extend(u: &Field, e: &PolarSetSpec, center: C64, radius: f64) -> Result<PoissonExtension> {
    let grid = u.grid();
    if grid.nvars() != 1 || !u.is_scalar() {
        return Err(DbarError::InvalidInput("Poisson extension needs a scalar one-variable field".into()));
    }
    let h = grid.max_spacing();
    let markers = e.markers(grid);
    let dist = e.distances(grid);
    if e
        .all_points()
        .iter()
        .any(|p| ((p - center).norm() - radius).abs() <= 4.0 * h)
    {
        return Err(DbarError::InvalidInput("circle passes within four spacings of E".into()));
    }
    let nodes = MIN_NODES.max((16.0 * radius / h).ceil() as usize);
    let boundary: Vec<(C64, f64)> = (0..nodes)
        .map(|k| {
            let zeta = center + C64::from_polar(radius, 2.0 * PI * k as f64 / nodes as f64);
            interpolate(u, zeta, Order::Quintic)
                .map(|v| (zeta, v.re))
                .ok_or_else(|| DbarError::OutOfDomain(format!("circle node {zeta} outside the grid")))
        })
        .collect::<Result<_>>()?;

    let inside: Vec<bool> = (0..grid.len())
        .map(|i| grid.mask()[i] && (grid.z(i) - center).norm() <= radius - 2.0 * h)
        .collect();
    let off_e: Vec<usize> = (0..grid.len()).filter(|&i| inside[i] && !markers[i]).collect();
    let mods: Vec<f64> = off_e.iter().map(|&i| u.at(i).re.abs()).collect();
    let big = mods.iter().cloned().fold(0.0, f64::max);
    let med = median(&mods);
    if !big.is_finite() || big > UNBOUNDED_RATIO * med.max(f64::MIN_POSITIVE) {
        return Err(DbarError::BoundednessViolation(format!("max |u| = {big:e}, median {med:e}")));
    }
    // a bounded harmonic function cannot leave the range of its boundary values
    let lo = boundary.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
    let hi = boundary.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
    let slack = MAX_PRINCIPLE_SLACK * (hi - lo + 1.0);
    if let Some(&i) = off_e
        .iter()
        .find(|&&i| u.at(i).re < lo - slack || u.at(i).re > hi + slack)
    {
        return Err(DbarError::BoundednessViolation(format!(
            "u = {:e} at {} leaves the boundary range [{lo:e}, {hi:e}]",
            u.at(i).re,
            grid.z(i)
        )));
    }
    let re: Vec<f64> = u.values().iter().map(|c| c.re).collect();
    let lap = laplacian(grid, &re);
    let worst = off_e
        .iter()
        .filter(|&&i| dist[i] > 2.0 * h)
        .filter_map(|&i| lap[i])
        .map(f64::abs)
        .fold(0.0, f64::max);
    if worst > HARMONIC_SLACK * (hi - lo).max(1e-12) / (radius * radius) {
        return Err(DbarError::NotHarmonic(worst));
    }

    let r2 = radius * radius;
    let filled_values: Vec<(usize, f64)> = (0..grid.len())
        .into_par_iter()
        .filter(|&i| inside[i])
        .map(|i| {
            let z = grid.z(i);
            let d2 = (z - center).norm_sqr();
            let s: f64 = boundary
                .iter()
                .map(|(zeta, v)| v * (r2 - d2) / (zeta - z).norm_sqr())
                .sum();
            (i, s / nodes as f64)
        })
        .collect();
    let mut values = u.values().to_vec();
    let mut sup = 0.0f64;
    for &(i, v) in &filled_values {
        if !markers[i] {
            sup = sup.max((v - u.at(i).re).abs());
        }
        values[i] = C64::new(v, 0.0);
    }
    Ok(PoissonExtension {
        field: Field::scalar(u.grid_arc().clone(), values)?,
        filled: inside,
        filled_cells: filled_values.len(),
        nodes,
        sup_error_off_e: sup,
    })
}
