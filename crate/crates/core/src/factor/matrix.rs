use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::params::{calibrate, ContractionParams};
use super::scalar::{extend_by_zero, holomorphy_residual, require_exponent};
use crate::error::{DbarError, Result};
use crate::grid::{lp_norm, ComplexGrid, Domain, Field, OneForm};
use crate::transforms::cauchy_transform;
use crate::C64;

/// Stop once successive iterates differ by less than this (sup norm).
pub const FIXED_POINT_TOL: f64 = 1e-11;
pub const MAX_ITERATIONS: usize = 200;
const BLOWUP: f64 = 1e6;

#[derive(Clone, Debug, Serialize)]
pub struct MatrixFactor {
    #[serde(skip)]
    pub g: Field,
    /// `F = (I + g) f`.
    #[serde(skip)]
    pub factor: Field,
    pub params: ContractionParams,
    pub iterations: usize,
    /// `‖g_{k+1} − g_k‖_∞` per iteration.
    pub step_history: Vec<f64>,
    /// `‖g + T((I+g)A)‖_∞` at the returned `g`.
    pub fixed_point_residual: f64,
    /// Largest ratio of successive steps above round-off.
    pub convergence_ratio: Option<f64>,
    /// Max row-sum norm of `g` over the domain.
    pub g_norm: f64,
    pub g_bound: f64,
    /// `L^p` norm of the row-sum norm of `A`.
    pub measured_m: f64,
    pub dbar_residual: f64,
}

/// Row-sum matrix norm `max_r Σ_c |X_rc|` at each cell.
pub fn row_sum_norms(x: &Field) -> Vec<f64> {
    let (r, c) = (x.rows(), x.cols());
    (0..x.grid().len())
        .map(|i| {
            let cell = x.cell(i);
            (0..r)
                .map(|a| (0..c).map(|b| cell[a * c + b].norm()).sum::<f64>())
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `M = ‖ |A|_row ‖_{L^p}` over the domain of a one-variable coefficient.
pub fn coefficient_bound(a: &OneForm, p: f64) -> Result<f64> {
    let coef = a.component(0);
    let norms = row_sum_norms(coef);
    let field = Field::scalar(
        coef.grid_arc().clone(),
        norms.into_iter().map(|v| C64::new(v, 0.0)).collect(),
    )?;
    lp_norm(&field, p, None)
}

fn disc_radius(grid: &ComplexGrid) -> Result<f64> {
    match grid.domain() {
        Domain::Disc { radius, .. } => Ok(*radius),
        _ => Err(DbarError::InvalidInput(
            "matrix factor needs a disc domain".into(),
        )),
    }
}

impl ContractionParams {
    /// Parameters for `A` on its own disc: `δ` is the disc radius, `M` the
    /// measured bound and `c_{p,m}` the calibrated constant for the grid.
    pub fn calibrated(p: f64, a: &OneForm) -> Result<Self> {
        let grid = a.component(0).grid_arc().clone();
        let delta = disc_radius(&grid)?;
        let m = a.component(0).rows();
        let cal = calibrate(p, m, &grid)?;
        let m_bound = coefficient_bound(a, p)?;
        ContractionParams::new(p, delta, m_bound, cal.c_pm, m)
    }
}

/// Per cell `(I + g) A`.
fn left_multiply(g: &Field, a: &Field) -> Field {
    let m = a.rows();
    let k = m * m;
    let mut out = a.clone();
    let vals = out.values_mut();
    vals.par_chunks_mut(k).enumerate().for_each(|(i, cell)| {
        let gc = &g.values()[i * k..(i + 1) * k];
        let ac = &a.values()[i * k..(i + 1) * k];
        for r in 0..m {
            for c in 0..m {
                let mut s = ac[r * m + c];
                for j in 0..m {
                    s += gc[r * m + j] * ac[j * m + c];
                }
                cell[r * m + c] = s;
            }
        }
    });
    out
}

/// `S(g) = −T((I + g) A)`.
fn step(g: &Field, a: &Field) -> Result<Field> {
    Ok(cauchy_transform(&left_multiply(g, a))?.scale(C64::new(-1.0, 0.0)))
}

fn sup_masked(x: &Field) -> f64 {
    let g = x.grid();
    (0..g.len())
        .filter(|&i| g.mask()[i])
        .map(|i| x.cell(i).iter().map(|v| v.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

/// `(I + g) f` for a column field `f`.
fn apply_factor(g: &Field, f: &Field) -> Field {
    let m = f.rows();
    let mut out = f.clone();
    let vals = out.values_mut();
    for (i, cell) in vals.chunks_mut(m).enumerate() {
        let gc = &g.values()[i * m * m..(i + 1) * m * m];
        let fc = &f.values()[i * m..(i + 1) * m];
        for r in 0..m {
            cell[r] = fc[r] + (0..m).map(|j| gc[r * m + j] * fc[j]).sum::<C64>();
        }
    }
    out
}

/// Solve `g + T((I + g) A) = 0` by iterating `S` from `g = 0` and return
/// `g` with `F = (I + g) f`. `f` is an `m × 1` field and `A` an `m × m`
/// coefficient on a disc of radius at most `δ`.
pub fn integrating_factor_matrix(
    f: &Field,
    a: &OneForm,
    params: &ContractionParams,
) -> Result<MatrixFactor> {
    require_exponent(params)?;
    let grid = f.grid();
    if grid.nvars() != 1 || f.cols() != 1 {
        return Err(DbarError::InvalidInput(
            "matrix factor needs a column field on a one-variable grid".into(),
        ));
    }
    let m = f.rows();
    let coef = a.component(0);
    if coef.rows() != m || coef.cols() != m || m != params.m {
        return Err(DbarError::InvalidInput(format!(
            "coefficient is {}x{}, field has {m} rows, params say m = {}",
            coef.rows(),
            coef.cols(),
            params.m
        )));
    }
    if coef.grid().shape() != grid.shape() {
        return Err(DbarError::InvalidInput("coefficient grid mismatch".into()));
    }
    if disc_radius(grid)? > params.delta * (1.0 + 1e-12) {
        return Err(DbarError::InvalidInput(format!(
            "disc radius exceeds δ = {}",
            params.delta
        )));
    }
    let measured_m = coefficient_bound(a, params.p.value())?;
    if measured_m > params.m_bound * (1.0 + 1e-9) {
        return Err(DbarError::InvalidInput(format!(
            "coefficient bound {measured_m} exceeds declared M = {}",
            params.m_bound
        )));
    }
    params.check()?;

    // zero set of f: the coefficient is extended by 0 there
    let modulus = Field::scalar(
        f.grid_arc().clone(),
        (0..grid.len()).map(|i| C64::new(f.cell_modulus(i), 0.0)).collect(),
    )?;
    let coef = extend_by_zero(&modulus, &coef.masked())?;

    let mut g = Field::zeros(f.grid_arc().clone(), m, m);
    let mut history = Vec::new();
    loop {
        let next = step(&g, &coef)?;
        let d = sup_masked(&next.sub(&g)?);
        g = next;
        history.push(d);
        if d <= FIXED_POINT_TOL {
            break;
        }
        if !d.is_finite() || d > BLOWUP || history.len() >= MAX_ITERATIONS {
            return Err(DbarError::Divergence {
                iterations: history.len(),
                last: d,
                history,
            });
        }
    }
    let fixed_point_residual = sup_masked(&g.sub(&step(&g, &coef)?)?);
    let convergence_ratio = history
        .windows(2)
        .filter(|w| w[0] > 1e3 * FIXED_POINT_TOL)
        .map(|w| w[1] / w[0])
        .reduce(f64::max);
    let g_rows = row_sum_norms(&g);
    let g_norm = (0..grid.len())
        .filter(|&i| grid.mask()[i])
        .map(|i| g_rows[i])
        .fold(0.0, f64::max);
    let factor = apply_factor(&g, f);
    let dbar_residual = holomorphy_residual(&factor);
    Ok(MatrixFactor {
        g,
        factor,
        params: *params,
        iterations: history.len(),
        step_history: history,
        fixed_point_residual,
        convergence_ratio,
        g_norm,
        g_bound: params.g_bound(),
        measured_m,
        dbar_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Tile {
    pub center: C64,
    pub report: MatrixFactor,
}

#[derive(Clone, Debug, Serialize)]
pub struct TiledFactor {
    pub params: ContractionParams,
    pub shrunk: bool,
    pub tiles: Vec<Tile>,
}

/// Run the matrix construction on discs of radius `δ / 2^k`, the largest
/// admissible one, centred on lattice nodes spaced `δ / 2^k` apart across
/// the domain. The calibration constant of `params` is reused on each disc.
pub fn integrating_factor_tiled(
    f: &Field,
    a: &OneForm,
    params: &ContractionParams,
) -> Result<TiledFactor> {
    let shrunk = !params.admissible();
    let p = params.shrink_to_admissible();
    let grid = f.grid();
    let h = grid.max_spacing();
    if p.delta < 3.0 * h {
        return Err(DbarError::ContractionViolation {
            product: params.product(),
            suggested_delta: p.delta,
        });
    }
    let centers = tile_centers(grid, p.delta);
    let tiles = centers
        .par_iter()
        .map(|&c| {
            let sub = Arc::new(sub_grid(grid, c, p.delta)?);
            let fs = restrict(f, &sub)?;
            let coef = restrict(a.component(0), &sub)?;
            let report = integrating_factor_matrix(&fs, &OneForm::single(coef)?, &p)?;
            Ok(Tile { center: c, report })
        })
        .collect::<Result<Vec<Tile>>>()?;
    Ok(TiledFactor {
        params: p,
        shrunk,
        tiles,
    })
}

fn tile_centers(grid: &ComplexGrid, step: f64) -> Vec<C64> {
    let (o, s, n) = (grid.origin(), grid.spacing(), grid.shape());
    let hi = [o[0] + (n[0] - 1) as f64 * s[0], o[1] + (n[1] - 1) as f64 * s[1]];
    let mut out = Vec::new();
    let mut y = o[1] + 0.5 * step;
    while y < hi[1] {
        let mut x = o[0] + 0.5 * step;
        while x < hi[0] {
            if let Some((a, b)) = grid.nearest_node(0, C64::new(x, y)) {
                let i = grid.ravel(&[a, b]);
                if grid.center_inside(i) {
                    out.push(grid.z(i));
                }
            }
            x += step;
        }
        y += step;
    }
    out.dedup();
    out
}

/// Sub-lattice of `grid` covering the disc `D(c, r)`, masked to the disc
/// and the parent mask.
pub(crate) fn sub_grid(grid: &ComplexGrid, c: C64, r: f64) -> Result<ComplexGrid> {
    let (o, s, n) = (grid.origin(), grid.spacing(), grid.shape());
    let mut lo = [0usize; 2];
    let mut len = [0usize; 2];
    for ax in 0..2 {
        let centre = if ax == 0 { c.re } else { c.im };
        let a = ((centre - r - o[ax]) / s[ax]).floor().max(0.0) as usize;
        let b = (((centre + r - o[ax]) / s[ax]).ceil() as usize).min(n[ax] - 1);
        lo[ax] = a;
        len[ax] = b - a + 1;
    }
    let mut mask = Vec::with_capacity(len[0] * len[1]);
    for a in 0..len[0] {
        for b in 0..len[1] {
            mask.push(grid.mask()[grid.ravel(&[lo[0] + a, lo[1] + b])]);
        }
    }
    ComplexGrid::from_parts(
        Domain::disc(c, r),
        vec![o[0] + lo[0] as f64 * s[0], o[1] + lo[1] as f64 * s[1]],
        s.to_vec(),
        len.to_vec(),
        Some(mask),
    )
}

/// Values of `f` on an aligned sub-lattice.
pub(crate) fn restrict(f: &Field, sub: &Arc<ComplexGrid>) -> Result<Field> {
    let off = f
        .grid()
        .lattice_offset(sub)
        .ok_or_else(|| DbarError::InvalidInput("sub-grid is not aligned".into()))?;
    let k = f.cell_len();
    let mut values = Vec::with_capacity(sub.len() * k);
    for i in 0..sub.len() {
        let idx = sub.unravel(i);
        let parent = f.grid().ravel(&[
            (idx[0] as i64 + off[0]) as usize,
            (idx[1] as i64 + off[1]) as usize,
        ]);
        values.extend_from_slice(f.cell(parent));
    }
    Field::new(sub.clone(), f.rows(), f.cols(), values)
}
