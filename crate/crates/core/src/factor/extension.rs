use std::f64::consts::PI;

use serde::Serialize;

use super::scalar::ZERO_FLOOR;
use crate::error::{DbarError, Result};
use crate::grid::{ComplexGrid, Exponent, Field, OneForm};
use crate::numeric::disc_rect_area;
use crate::transforms::dbar;
use crate::C64;

/// Relative excess over the tube bound that raises the violation flag.
pub const BOUND_SLACK: f64 = 0.1;
/// Tube radii in lattice spacings.
pub const TUBE_SPACINGS: [f64; 3] = [2.0, 4.0, 8.0];
/// Offsets of the sampled line positions, as fractions of the factor
/// half-width.
const LINE_OFFSETS: [(f64, f64); 5] = [(0.0, 0.0), (0.3, 0.0), (-0.3, 0.0), (0.0, 0.3), (0.0, -0.3)];

#[derive(Clone, Debug, Serialize)]
pub struct TubeCheck {
    /// Variable held near `center` (1-based).
    pub fixed_var: usize,
    pub center: C64,
    pub eps: f64,
    /// `‖B‖_{L^p(D ∩ L_ε)}`.
    pub measured: f64,
    /// `(πε²)^{(n−1)/p} M`.
    pub bound: f64,
    pub ratio: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceBoundReport {
    pub p: f64,
    pub m: f64,
    /// Largest `‖B|_L‖_{L^p}` over all lattice lines of both families.
    pub measured_line_bound: f64,
    pub checks: Vec<TubeCheck>,
    pub max_ratio: f64,
    pub violation: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrivialExtension {
    #[serde(skip)]
    pub b: OneForm,
    pub report: SliceBoundReport,
}

/// `∂̄f / f` per variable, set to zero where `|f| ≤ ZERO_FLOOR · max|f|`.
pub fn dbar_log_coefficient(f: &Field) -> Result<OneForm> {
    let floor = ZERO_FLOOR * f.max_modulus();
    let d = dbar(f);
    let comps = d
        .components()
        .iter()
        .map(|c| c.zip_map(f, |dv, v| if v.norm() > floor { dv / v } else { C64::new(0.0, 0.0) }))
        .collect::<Result<Vec<Field>>>()?;
    OneForm::new(comps)
}

/// `B = A` off the numerical zero set of `f` and `0` on it, with the tube
/// bound `‖B‖_{L^p(D ∩ L_ε)} ≤ (πε²)^{(n−1)/p} M` checked on a few lines of
/// each coordinate family.
pub fn trivial_extension(f: &Field, a: &OneForm, p: f64, m: f64) -> Result<TrivialExtension> {
    let exp = Exponent::new(p)?;
    let grid = f.grid();
    if !f.is_scalar() || a.grid().shape() != grid.shape() {
        return Err(DbarError::InvalidInput(
            "trivial extension needs a scalar f and a form on its grid".into(),
        ));
    }
    let floor = ZERO_FLOOR * f.max_modulus();
    let b = OneForm::new(
        a.components()
            .iter()
            .map(|c| {
                c.zip_map(f, |av, fv| if fv.norm() > floor { av } else { C64::new(0.0, 0.0) })
            })
            .collect::<Result<Vec<Field>>>()?,
    )?;
    let modulus: Vec<f64> = (0..grid.len())
        .map(|i| {
            b.components()
                .iter()
                .map(|c| c.at(i).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();

    let mut checks = Vec::new();
    let mut line_bound = 0.0f64;
    if grid.nvars() == 2 {
        for fixed in 0..2 {
            line_bound = line_bound.max(max_line_norm(grid, &modulus, fixed, exp));
            let fg = grid.factor_grid(fixed);
            let h = grid.var_spacing(fixed);
            for &(ox, oy) in &LINE_OFFSETS {
                let Some(c) = line_node(&fg, ox, oy) else { continue };
                for &k in &TUBE_SPACINGS {
                    let eps = k * h;
                    let Some(measured) = tube_norm(grid, &fg, &modulus, fixed, c, eps, exp) else {
                        continue;
                    };
                    let bound = match exp {
                        Exponent::Finite(pv) => (PI * eps * eps).powf(1.0 / pv) * m,
                        Exponent::Infinity => m,
                    };
                    let ratio = if bound > 0.0 { measured / bound } else if measured > 0.0 { f64::INFINITY } else { 0.0 };
                    checks.push(TubeCheck {
                        fixed_var: fixed + 1,
                        center: c,
                        eps,
                        measured,
                        bound,
                        ratio,
                        violated: ratio > 1.0 + BOUND_SLACK,
                    });
                }
            }
        }
    }
    let max_ratio = checks.iter().map(|c| c.ratio).fold(0.0, f64::max);
    let violation = checks.iter().any(|c| c.violated);
    Ok(TrivialExtension {
        b,
        report: SliceBoundReport {
            p,
            m,
            measured_line_bound: line_bound,
            checks,
            max_ratio,
            violation,
        },
    })
}

/// Node of the factor lattice nearest to `centre + (ox, oy) · half-width`.
fn line_node(fg: &ComplexGrid, ox: f64, oy: f64) -> Option<C64> {
    let (o, s, n) = (fg.origin(), fg.spacing(), fg.shape());
    let half = [0.5 * (n[0] - 1) as f64 * s[0], 0.5 * (n[1] - 1) as f64 * s[1]];
    let target = C64::new(o[0] + half[0] * (1.0 + ox), o[1] + half[1] * (1.0 + oy));
    let (a, b) = fg.nearest_node(0, target)?;
    Some(fg.z(fg.ravel(&[a, b])))
}

fn split_index(grid: &ComplexGrid, i: usize, fixed: usize) -> (usize, usize) {
    let idx = grid.unravel(i);
    let n = grid.shape();
    let first = idx[0] * n[1] + idx[1];
    let second = idx[2] * n[3] + idx[3];
    if fixed == 0 {
        (first, second)
    } else {
        (second, first)
    }
}

fn max_line_norm(grid: &ComplexGrid, modulus: &[f64], fixed: usize, exp: Exponent) -> f64 {
    let fixed_grid = grid.factor_grid(fixed);
    let free_grid = grid.factor_grid(1 - fixed);
    let mut acc = vec![0.0f64; fixed_grid.len()];
    for (i, &v) in modulus.iter().enumerate() {
        let (fi, li) = split_index(grid, i, fixed);
        if !fixed_grid.mask()[fi] || !free_grid.mask()[li] {
            continue;
        }
        match exp {
            Exponent::Finite(p) => acc[fi] += v.powf(p) * free_grid.quad_weight(li),
            Exponent::Infinity => acc[fi] = acc[fi].max(v),
        }
    }
    acc.into_iter()
        .map(|s| match exp {
            Exponent::Finite(p) => s.powf(1.0 / p),
            Exponent::Infinity => s,
        })
        .fold(0.0, f64::max)
}

/// `‖B‖` over the tube `|z_fixed − c| < ε`, or `None` when the tube is
/// not contained in fully covered cells of the fixed factor.
fn tube_norm(
    grid: &ComplexGrid,
    fg: &ComplexGrid,
    modulus: &[f64],
    fixed: usize,
    c: C64,
    eps: f64,
    exp: Exponent,
) -> Option<f64> {
    let (hx, hy) = (fg.spacing()[0], fg.spacing()[1]);
    let full = hx * hy;
    let area: Vec<f64> = (0..fg.len())
        .map(|j| {
            let z = fg.z(j);
            disc_rect_area(c, eps, z.re - 0.5 * hx, z.re + 0.5 * hx, z.im - 0.5 * hy, z.im + 0.5 * hy)
        })
        .collect();
    if area
        .iter()
        .enumerate()
        .any(|(j, &t)| t > 0.0 && (fg.quad_weight(j) - full).abs() > 1e-12 * full)
    {
        return None;
    }
    let free_grid = grid.factor_grid(1 - fixed);
    let mut sum = 0.0;
    for (i, &v) in modulus.iter().enumerate() {
        let (fi, li) = split_index(grid, i, fixed);
        if area[fi] == 0.0 || !free_grid.mask()[li] {
            continue;
        }
        match exp {
            Exponent::Finite(p) => sum += v.powf(p) * area[fi] * free_grid.quad_weight(li),
            Exponent::Infinity => sum = f64::max(sum, v),
        }
    }
    Some(match exp {
        Exponent::Finite(p) => sum.powf(1.0 / p),
        Exponent::Infinity => sum,
    })
}
