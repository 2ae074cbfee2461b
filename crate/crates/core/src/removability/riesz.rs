use serde::Serialize;

use super::polar::PolarSetSpec;
use super::{axis_neighbours, laplacian};
use crate::error::{DbarError, Result};
use crate::grid::Field;
use crate::transforms::newton_potential;
use crate::C64;

/// Negative cell masses below this fraction of the largest positive mass
/// are treated as round-off and clamped to zero.
const NEGATIVE_SLACK: f64 = 0.05;
/// Absolute allowance for negative masses, relative to `max |g|`.
const ROUNDOFF: f64 = 1e-9;
/// Cells peeled off the mass region before testing `h` for harmonicity.
const HARMONIC_MARGIN: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct RieszDecomposition {
    /// `Δg` on cells carrying mass, zero elsewhere.
    #[serde(skip)]
    pub density: Field,
    /// `g − N∗μ`.
    #[serde(skip)]
    pub h: Field,
    /// Cell masses `Δg · h²`.
    #[serde(skip)]
    pub mu: Vec<f64>,
    /// Mass after clamping round-off negatives.
    pub total_mass: f64,
    /// `Σ Δg · h²` before clamping; equals the flux by summation by parts.
    pub signed_mass: f64,
    /// Outward difference quotients of `g` summed over the edges leaving
    /// the mass region.
    pub flux: f64,
    pub e_mass: f64,
    pub single_cell_mass: f64,
    pub clamped_mass: f64,
    /// `max |Δh|` a few cells inside the mass region, relative to `max Δg`.
    pub harmonic_residual: f64,
}

/// Split a bounded subharmonic `g` into `μ∗N + h`, `N = log|z|/2π`.
/// Mass lives on full cells whose four neighbours are in the mask.
pub fn riesz_decompose(g: &Field, e: &PolarSetSpec) -> Result<RieszDecomposition> {
    let grid = g.grid();
    if grid.nvars() != 1 || !g.is_scalar() {
        return Err(DbarError::InvalidInput("Riesz decomposition needs a scalar one-variable field".into()));
    }
    let re: Vec<f64> = g.values().iter().map(|c| c.re).collect();
    if re.iter().zip(grid.mask()).any(|(v, &m)| m && !v.is_finite()) {
        return Err(DbarError::BoundednessViolation("g is not finite on the mask".into()));
    }
    let area = grid.cell_volume();
    let lap = laplacian(grid, &re);
    let region: Vec<bool> = (0..grid.len())
        .map(|i| lap[i].is_some() && grid.weights()[i] >= 1.0 - 1e-12)
        .collect();
    let mut mu: Vec<f64> = (0..grid.len())
        .map(|i| if region[i] { lap[i].unwrap() * area } else { 0.0 })
        .collect();
    let gmax = re
        .iter()
        .zip(grid.mask())
        .filter(|(_, &m)| m)
        .map(|(v, _)| v.abs())
        .fold(0.0, f64::max);
    let signed: f64 = mu.iter().sum();
    let top = mu.iter().cloned().fold(0.0, f64::max);
    let mut clamped = 0.0;
    for (i, m) in mu.iter_mut().enumerate() {
        if *m < 0.0 {
            if *m < -(NEGATIVE_SLACK * top).max(ROUNDOFF * (gmax + 1.0)) {
                return Err(DbarError::NotSubharmonic { cell: i, value: *m / area });
            }
            clamped -= *m;
            *m = 0.0;
        }
    }
    let total: f64 = mu.iter().sum();
    let (hx, hy) = (grid.spacing()[0], grid.spacing()[1]);
    let mut flux = 0.0;
    for i in (0..grid.len()).filter(|&i| region[i]) {
        let nb = axis_neighbours(grid, i).expect("region cells are interior");
        for (k, &j) in nb.iter().enumerate() {
            if !region[j] {
                let (along, across) = if k < 2 { (hx, hy) } else { (hy, hx) };
                flux += (re[j] - re[i]) / along * across;
            }
        }
    }
    let density = Field::scalar(
        g.grid_arc().clone(),
        mu.iter().map(|m| C64::new(m / area, 0.0)).collect(),
    )?;
    let h = if total > 0.0 {
        let source = density.with_grid(std::sync::Arc::new(grid.with_mask(&region)))?;
        let pot = newton_potential(&source, g.grid_arc().clone())?;
        g.sub(&pot)?
    } else {
        g.clone()
    };
    let hre: Vec<f64> = h.values().iter().map(|c| c.re).collect();
    let hlap = laplacian(grid, &hre);
    // the potential of a density that jumps at the region edge is only
    // resolved a few cells in
    let mut deep = region.clone();
    for _ in 0..HARMONIC_MARGIN {
        deep = (0..grid.len())
            .map(|i| deep[i] && axis_neighbours(grid, i).is_some_and(|nb| nb.iter().all(|&j| deep[j])))
            .collect();
    }
    let dmax = mu.iter().cloned().fold(0.0, f64::max) / area;
    let harmonic = (0..grid.len())
        .filter(|&i| deep[i])
        .filter_map(|i| hlap[i])
        .map(f64::abs)
        .fold(0.0, f64::max);
    let markers = e.markers(grid);
    let e_mass = (0..grid.len()).filter(|&i| markers[i]).map(|i| mu[i]).sum();
    Ok(RieszDecomposition {
        density,
        h,
        single_cell_mass: top,
        total_mass: total,
        signed_mass: signed,
        flux,
        e_mass,
        clamped_mass: clamped,
        harmonic_residual: if dmax > 0.0 { harmonic / dmax } else { harmonic },
        mu,
    })
}
