use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{DbarError, Result};
use crate::grid::interp::{interpolate, Order};
use crate::grid::{slice, Field, LineAxis};
use crate::numeric::fit_line;
use crate::transforms::{cauchy_transform, dzbar};
use crate::C64;

/// A line restriction counts as identically zero below this fraction of the
/// global maximum.
pub const VANISHING_RATIO: f64 = 1e-12;
/// Largest allowed distance of a fitted slope from an integer.
pub const ORDER_SLACK: f64 = 0.25;

const RAYS: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct VanishingOrder {
    pub point: [C64; 2],
    /// Order along the `z1` and `z2` coordinate lines; `None` is `∞`.
    pub orders: [Option<u32>; 2],
    pub slopes: [f64; 2],
    /// Minimum of the finite orders, `None` when both are infinite.
    pub n_p: Option<u32>,
}

/// Vanishing order of `f` at `point` along each coordinate line, from
/// the slope of `log|F|` against `log r` on rays, where `F = e^{-u} f` with
/// `u` the Cauchy transform of `∂̄f / f` on the line.
pub fn vanishing_order(f: &Field, point: [C64; 2]) -> Result<VanishingOrder> {
    let grid = f.grid();
    if grid.nvars() != 2 || !f.is_scalar() {
        return Err(DbarError::InvalidInput(
            "vanishing order needs a scalar field on a two-variable grid".into(),
        ));
    }
    let global = f.max_modulus();
    let mut orders = [None, None];
    let mut slopes = [f64::INFINITY; 2];
    for var in 0..2 {
        // the line along z_{var+1}: fix the other coordinate
        let axis = if var == 0 { LineAxis::FixSecond } else { LineAxis::FixFirst };
        let line = slice(f, axis, point[1 - var])?;
        if line.max_modulus() <= VANISHING_RATIO * global {
            continue;
        }
        let corrected = integrating_factor_line(&line)?;
        let slope = ray_slope(&corrected, point[var])?;
        if (slope - slope.round()).abs() > ORDER_SLACK || slope.round() < 0.0 {
            return Err(DbarError::IndeterminateOrder { axis: var + 1, slope });
        }
        slopes[var] = slope;
        orders[var] = Some(slope.round() as u32);
    }
    let n_p = orders.iter().flatten().copied().min();
    Ok(VanishingOrder {
        point,
        orders,
        slopes,
        n_p,
    })
}

/// `e^{-T(∂̄f/f)} f` on a one-variable grid, with the quotient set to zero
/// where `|f|` is negligible.
fn integrating_factor_line(line: &Field) -> Result<Field> {
    let d = dzbar(line, 0);
    let floor = VANISHING_RATIO * line.max_modulus();
    let a = line.zip_map(&d, |v, dv| if v.norm() > floor { dv / v } else { C64::new(0.0, 0.0) })?;
    if a.max_modulus() == 0.0 {
        return Ok(line.clone());
    }
    let u = cauchy_transform(&a)?;
    line.zip_map(&u, |v, w| v * (-w).exp())
}

/// Mean over rays of the least-squares slope of `log|F|` against `log r`
/// for `r` between two and eleven lattice spacings.
fn ray_slope(f: &Field, centre: C64) -> Result<f64> {
    let h = f.grid().max_spacing();
    let radii: Vec<f64> = (0..6).map(|k| 2.0 * h * 2f64.powf(0.5 * k as f64)).collect();
    let mut total = 0.0;
    for j in 0..RAYS {
        let dir = C64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / RAYS as f64);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &r in &radii {
            let v = interpolate(f, centre + dir * r, Order::Quintic).ok_or_else(|| {
                DbarError::OutOfDomain(format!("ray from {centre} leaves the grid"))
            })?;
            xs.push(r.ln());
            ys.push(v.norm().max(f64::MIN_POSITIVE).ln());
        }
        total += fit_line(&xs, &ys).0;
    }
    Ok(total / RAYS as f64)
}
