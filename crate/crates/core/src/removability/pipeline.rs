use std::sync::Arc;

use serde::Serialize;

use super::jhol::{jhol_residual, AlmostComplexStructure};
use super::laplacian;
use super::polar::PolarSetSpec;
use crate::error::Result;
use crate::grid::{holder_norm, lp_norm, ComplexGrid, Field};
use crate::transforms::{beltrami_solve, beurling_transform, dz, dzbar, BeltramiProblem};
use crate::C64;

/// Hölder exponent used for the regularity measurement of `∂u`.
const HOLDER_EXPONENT: f64 = 0.5;
/// The verdict tolerance is this multiple of the stencil error.
const STENCIL_FACTOR: f64 = 10.0;
const RESIDUAL_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Removable,
    NotRemovable,
    Inconclusive,
}

/// Beltrami bootstrap for one component.
#[derive(Clone, Debug, Serialize)]
pub struct BeltramiStep {
    pub component: usize,
    pub c0: f64,
    pub ratio: f64,
    pub epsilon_r: f64,
    pub iterations: usize,
    /// `‖h − ∂̄u‖₂` relative to `max(‖∂̄u‖₂, ‖∂u‖₂)`.
    pub bootstrap_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RemovabilityReport {
    pub gradient_l2: f64,
    /// `(½ ∫ Δ|u|²)^{1/2}` over the same cells.
    pub gradient_l2_via_laplacian: f64,
    pub laplacian_positivity_violations: usize,
    pub min_laplacian: f64,
    pub off_e_residual: f64,
    pub final_residual: f64,
    /// Richardson estimate of the discretisation error of the residual.
    pub stencil_tolerance: f64,
    pub tolerance: f64,
    /// `sup |∂̄u| / |∂u|`; `None` when unbounded.
    pub required_c0: Option<f64>,
    pub beltrami: Vec<BeltramiStep>,
    pub holder_dz: f64,
    pub verdict: Verdict,
    pub reason: String,
}

/// Every other node of a one-variable grid.
fn coarsen(f: &Field) -> Result<Field> {
    let g = f.grid();
    let shape: Vec<usize> = g.shape().iter().map(|n| n.div_ceil(2)).collect();
    let spacing: Vec<f64> = g.spacing().iter().map(|h| 2.0 * h).collect();
    let coarse = Arc::new(ComplexGrid::from_parts(
        g.domain().clone(),
        g.origin().to_vec(),
        spacing,
        shape.clone(),
        None,
    )?);
    let k = f.cell_len();
    let mut values = Vec::with_capacity(coarse.len() * k);
    for i in 0..coarse.len() {
        let idx = coarse.unravel(i);
        values.extend_from_slice(f.cell(g.ravel(&[2 * idx[0], 2 * idx[1]])));
    }
    Field::new(coarse, f.rows(), f.cols(), values)
}

fn real_sq_norm(f: &Field) -> Vec<f64> {
    (0..f.grid().len()).map(|i| f.cell_modulus(i).powi(2)).collect()
}

/// Check that a continuous curve, J-holomorphic off `E`, is J-holomorphic
/// across `E`.
pub fn theorem_b_pipeline(
    u: &Field,
    e: &PolarSetSpec,
    j: &AlmostComplexStructure,
) -> Result<RemovabilityReport> {
    let grid = u.grid_arc().clone();
    let h = grid.max_spacing();
    let fine = jhol_residual(u, j)?;
    let coarse_u = coarsen(u)?;
    let coarse = jhol_residual(&coarse_u, j)?;
    let dist = e.distances(&grid);
    let off_e = |i: usize| grid.center_inside(i) && dist[i] > 2.0 * h;

    let du = dz(u, 0);
    let dbu = dzbar(u, 0);
    let scale = 1.0 + du.max_modulus();
    let mut richardson = 0.0f64;
    for ci in 0..coarse_u.grid().len() {
        let idx = coarse_u.grid().unravel(ci);
        let fi = grid.ravel(&[2 * idx[0], 2 * idx[1]]);
        if off_e(fi) && coarse_u.grid().center_inside(ci) && coarse_u.grid().mask()[ci] {
            let d: f64 = (0..j.n)
                .map(|r| (coarse.residual.cell(ci)[r] - fine.residual.cell(fi)[r]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            richardson = richardson.max(d / 3.0);
        }
    }
    let stencil_tolerance = richardson.max(RESIDUAL_FLOOR * scale);
    let tolerance = STENCIL_FACTOR * stencil_tolerance;
    let (mut off_res, mut final_res) = (0.0f64, 0.0f64);
    for i in (0..grid.len()).filter(|&i| grid.center_inside(i)) {
        let r = fine.residual.cell_modulus(i);
        final_res = final_res.max(r);
        if off_e(i) {
            off_res = off_res.max(r);
        }
    }

    // steps 1 and 2: |u|² is subharmonic and controls the gradient
    let sq = real_sq_norm(u);
    let lap = laplacian(&grid, &sq);
    let coarse_lap = laplacian(coarse_u.grid(), &real_sq_norm(&coarse_u));
    let mut lap_richardson = 0.0f64;
    for (ci, cl) in coarse_lap.iter().enumerate() {
        let idx = coarse_u.grid().unravel(ci);
        let fi = grid.ravel(&[2 * idx[0], 2 * idx[1]]);
        if let (Some(a), Some(b)) = (cl, lap[fi]) {
            if off_e(fi) {
                lap_richardson = lap_richardson.max((a - b).abs() / 3.0);
            }
        }
    }
    let lap_max = lap.iter().flatten().map(|l| l.abs()).fold(0.0, f64::max);
    let lap_tol = STENCIL_FACTOR * lap_richardson + 1e-9 * (lap_max + 1.0);
    let area = grid.cell_volume();
    let (mut violations, mut min_lap, mut via_lap, mut grad) = (0, f64::INFINITY, 0.0, 0.0);
    for i in (0..grid.len()).filter(|&i| grid.center_inside(i)) {
        if let Some(l) = lap[i] {
            if l < -lap_tol {
                violations += 1;
            }
            min_lap = min_lap.min(l);
            via_lap += 0.5 * l * area;
            grad += 2.0 * (du.cell_modulus(i).powi(2) + dbu.cell_modulus(i).powi(2)) * area;
        }
    }

    let mut required: Option<f64> = Some(0.0);
    for i in (0..grid.len()).filter(|&i| grid.center_inside(i)) {
        let (a, b) = (dbu.cell_modulus(i), du.cell_modulus(i));
        if a <= RESIDUAL_FLOOR * scale {
            continue;
        }
        required = match required {
            Some(c) if b > RESIDUAL_FLOOR * scale => Some(c.max(a / b)),
            _ => None,
        };
    }

    // step 3: each component solves a Beltrami equation with α = −(Q conj ∂u)/∂u
    let mut beltrami = Vec::with_capacity(j.n);
    for comp in 0..j.n {
        let d = du.component(comp, 0);
        let db = dbu.component(comp, 0);
        let dmax = d.max_modulus();
        let mut av = vec![C64::new(0.0, 0.0); grid.len()];
        for (i, a) in av.iter_mut().enumerate() {
            let di = d.at(i);
            if di.norm() > 1e-12 * dmax {
                *a = -j.factor(u.cell(i)) * di.conj() / di;
            }
        }
        let alpha = Field::scalar(grid.clone(), av)?;
        let hol = d.sub(&beurling_transform(&db)?)?;
        let problem = BeltramiProblem::new(alpha, Field::zeros(grid.clone(), 1, 1)).with_holomorphic_dz(hol);
        let c0 = problem.c0();
        let sol = beltrami_solve(&problem)?;
        let denom = lp_norm(&db, 2.0, None)?.max(lp_norm(&d, 2.0, None)?).max(f64::MIN_POSITIVE);
        beltrami.push(BeltramiStep {
            component: comp,
            c0,
            ratio: sol.ratio,
            epsilon_r: sol.epsilon_r,
            iterations: sol.iterations,
            bootstrap_residual: lp_norm(&sol.u_zbar.sub(&db)?, 2.0, None)? / denom,
        });
    }

    // step 4 is a measurement only
    let holder_dz = holder_norm(&du, HOLDER_EXPONENT);

    let (verdict, reason) = if off_res > tolerance {
        (
            Verdict::NotRemovable,
            format!("residual {off_res:e} off E exceeds {tolerance:e}; u is not J-holomorphic there"),
        )
    } else if final_res <= tolerance && violations == 0 {
        (Verdict::Removable, format!("residual {final_res:e} on all of the domain"))
    } else {
        (
            Verdict::Inconclusive,
            format!("residual {final_res:e} near E, {violations} positivity violations"),
        )
    };
    Ok(RemovabilityReport {
        gradient_l2: grad.sqrt(),
        gradient_l2_via_laplacian: via_lap.max(0.0).sqrt(),
        laplacian_positivity_violations: violations,
        min_laplacian: if min_lap.is_finite() { min_lap } else { 0.0 },
        off_e_residual: off_res,
        final_residual: final_res,
        stencil_tolerance,
        tolerance,
        required_c0: required,
        beltrami,
        holder_dz,
        verdict,
        reason,
    })
}
