use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{DbarError, Result};
use crate::grid::{ComplexGrid, Field, OneForm};
use crate::numeric::pairwise_sum;
use crate::C64;

pub const TABLE_EXPONENTS: [f64; 3] = [2.0, 3.0, 4.0];
/// `ρ = 2^{-3} … 2^{-9}`.
pub const TABLE_RADII: [i32; 7] = [3, 4, 5, 6, 7, 8, 9];
pub const OUTER_RADIUS: f64 = 0.5;
/// Sub-samples per cell side in the norm table.
const SUBSAMPLES: usize = 4;
/// Offsets from a pole at which the decay of `|f|` is checked.
const POLE_OFFSETS: [f64; 3] = [1e-2, 1e-4, 1e-8];

/// Pole `a_k = 1/(4k)`.
pub fn pole(k: usize) -> f64 {
    0.25 / k as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct NormTable {
    pub exponents: Vec<f64>,
    pub rhos: Vec<f64>,
    /// `‖a‖_{L^p(ρ < |z| < 1/2)}` per exponent (rows) and radius.
    pub norms: Vec<Vec<f64>>,
}

impl NormTable {
    pub fn row(&self, p: f64) -> Option<&[f64]> {
        self.exponents
            .iter()
            .position(|&q| q == p)
            .map(|j| self.norms[j].as_slice())
    }

    fn increments(&self, p: f64) -> Vec<f64> {
        self.row(p)
            .map(|r| r.windows(2).map(|w| w[1] - w[0]).collect())
            .unwrap_or_default()
    }

    /// Successive differences shrink strictly as `ρ → 0`.
    pub fn cauchy_like(&self, p: f64) -> bool {
        let d = self.increments(p);
        !d.is_empty() && d.windows(2).all(|w| w[1].abs() < w[0].abs())
    }

    /// Strictly increasing with a final increment no smaller than the one
    /// before it.
    pub fn unbounded_growth(&self, p: f64) -> bool {
        let d = self.increments(p);
        d.len() >= 2 && d.iter().all(|&v| v > 0.0) && d[d.len() - 1] >= d[d.len() - 2]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub k: usize,
    pub poles: Vec<f64>,
    #[serde(skip)]
    pub f: Field,
    #[serde(skip)]
    pub a: OneForm,
    pub table: NormTable,
    /// `max|f|` over all sampled cells.
    pub max_modulus: f64,
    /// `max|f|` over cells with `|z − a_k| ≤ 1/e` for every `k`, where each
    /// product factor is at most one.
    pub max_modulus_core: f64,
    pub core_bound: f64,
    /// Whether `|f(a_k + t)|` decreases as `t` shrinks, for every pole.
    pub vanishes_at_poles: bool,
    /// Cells zeroed because they contain `0` or a pole.
    pub singular_cells: usize,
}

fn f_value(z: C64, poles: &[f64]) -> C64 {
    let mut d = z.norm().ln();
    for (k, &ak) in poles.iter().enumerate() {
        let w = 1.0 / ((k + 1) * (k + 1)) as f64;
        d *= (z - ak).norm().ln().abs().powf(w);
    }
    C64::new(1.0 / d, 0.0)
}

/// `∂̄f / f = −1/(2 z̄ log|z|) − Σ 1/(2k² (z̄ − ā_k) log|z − a_k|)`.
fn a_value(z: C64, poles: &[f64]) -> C64 {
    let mut s = -1.0 / (2.0 * z.conj() * z.norm().ln());
    for (k, &ak) in poles.iter().enumerate() {
        let w = ((k + 1) * (k + 1)) as f64;
        let d = z - ak;
        s -= 1.0 / (2.0 * w * d.conj() * d.norm().ln());
    }
    s
}

/// The truncated product with poles `a_1 … a_K` on a one-variable grid
/// inside `|z| < 1/2`, its coefficient `a = ∂̄f/f`, and the norm table of
/// `a` on annuli.
pub fn counterexample_field(k: usize, grid: &Arc<ComplexGrid>) -> Result<Counterexample> {
    if grid.nvars() != 1 {
        return Err(DbarError::InvalidInput("counterexample lives in one variable".into()));
    }
    let (o, s, n) = (grid.origin(), grid.spacing(), grid.shape());
    let hi = [o[0] + (n[0] - 1) as f64 * s[0], o[1] + (n[1] - 1) as f64 * s[1]];
    if o[0] < -OUTER_RADIUS - s[0] || o[1] < -OUTER_RADIUS - s[1] || hi[0] > OUTER_RADIUS + s[0] || hi[1] > OUTER_RADIUS + s[1] {
        return Err(DbarError::InvalidInput(
            "counterexample grid must lie in the disc of radius 1/2".into(),
        ));
    }
    let poles: Vec<f64> = (1..=k).map(pole).collect();
    let (hx, hy) = (s[0], s[1]);
    let singular: Vec<bool> = (0..grid.len())
        .map(|i| {
            let z = grid.z(i);
            let contains = |c: C64| (z.re - c.re).abs() <= 0.5 * hx && (z.im - c.im).abs() <= 0.5 * hy;
            contains(C64::new(0.0, 0.0)) || poles.iter().any(|&p| contains(C64::new(p, 0.0)))
        })
        .collect();
    let inside = |z: C64| z.norm() < OUTER_RADIUS;
    let zero = C64::new(0.0, 0.0);
    let pf = poles.clone();
    let sing = singular.clone();
    let f = Field::scalar(
        grid.clone(),
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let z = grid.z(i);
                if sing[i] || !inside(z) { zero } else { f_value(z, &pf) }
            })
            .collect(),
    )?;
    let a = Field::scalar(
        grid.clone(),
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let z = grid.z(i);
                if sing[i] || !inside(z) { zero } else { a_value(z, &pf) }
            })
            .collect(),
    )?;

    let mut max_modulus = 0.0f64;
    let mut max_core = 0.0f64;
    for i in 0..grid.len() {
        let z = grid.z(i);
        if !grid.mask()[i] || singular[i] || !inside(z) {
            continue;
        }
        let v = f.at(i).norm();
        max_modulus = max_modulus.max(v);
        if poles.iter().all(|&p| (z - p).norm() <= (-1.0f64).exp()) {
            max_core = max_core.max(v);
        }
    }
    let vanishes_at_poles = poles.iter().all(|&p| {
        let vals: Vec<f64> = POLE_OFFSETS
            .iter()
            .map(|&t| f_value(C64::new(p, t), &poles).norm())
            .collect();
        vals.windows(2).all(|w| w[1] < w[0])
    });

    Ok(Counterexample {
        k,
        table: norm_table(grid, &poles),
        poles,
        f,
        a: OneForm::single(a)?,
        max_modulus,
        max_modulus_core: max_core,
        core_bound: 1.0 / 2f64.ln(),
        vanishes_at_poles,
        singular_cells: singular.iter().filter(|&&b| b).count(),
    })
}

/// `‖a‖_{L^p(ρ < |z| < 1/2)}` by midpoint sampling on a `4 × 4` sub-lattice
/// of every cell.
fn norm_table(grid: &ComplexGrid, poles: &[f64]) -> NormTable {
    let rhos: Vec<f64> = TABLE_RADII.iter().map(|&j| 2f64.powi(-j)).collect();
    let (hx, hy) = (grid.spacing()[0], grid.spacing()[1]);
    let (sx, sy) = (hx / SUBSAMPLES as f64, hy / SUBSAMPLES as f64);
    let w = sx * sy;
    let np = TABLE_EXPONENTS.len();
    let nr = rhos.len();
    // per cell: Σ|a|^p w over sub-samples in each shell between rhos
    let shells: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let c = grid.z(i);
            let mut acc = vec![0.0; np * (nr + 1)];
            for u in 0..SUBSAMPLES {
                for v in 0..SUBSAMPLES {
                    let z = c + C64::new(
                        -0.5 * hx + (u as f64 + 0.5) * sx,
                        -0.5 * hy + (v as f64 + 0.5) * sy,
                    );
                    let r = z.norm();
                    if r >= OUTER_RADIUS || r <= rhos[nr - 1] {
                        continue;
                    }
                    // shell j: rhos[j] < r (<= rhos[j-1])
                    let shell = rhos.iter().position(|&q| r > q).expect("r above the last radius");
                    let m = a_value(z, poles).norm();
                    for (e, &p) in TABLE_EXPONENTS.iter().enumerate() {
                        acc[e * (nr + 1) + shell] += m.powf(p) * w;
                    }
                }
            }
            acc
        })
        .collect();
    let norms = TABLE_EXPONENTS
        .iter()
        .enumerate()
        .map(|(e, &p)| {
            let per_shell: Vec<f64> = (0..nr)
                .map(|j| {
                    let col: Vec<f64> = shells.iter().map(|c| c[e * (nr + 1) + j]).collect();
                    pairwise_sum(&col)
                })
                .collect();
            let mut total = 0.0;
            per_shell
                .into_iter()
                .map(|v| {
                    total += v;
                    total.powf(1.0 / p)
                })
                .collect()
        })
        .collect();
    NormTable {
        exponents: TABLE_EXPONENTS.to_vec(),
        rhos,
        norms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_is_the_log_derivative() {
        let poles: Vec<f64> = (1..=5).map(pole).collect();
        let z = C64::new(0.13, 0.07);
        let h = 1e-6;
        let dx = (f_value(z + h, &poles) - f_value(z - h, &poles)) / (2.0 * h);
        let dy = (f_value(z + C64::new(0.0, h), &poles) - f_value(z - C64::new(0.0, h), &poles)) / (2.0 * h);
        let dbar = 0.5 * (dx + C64::new(0.0, 1.0) * dy);
        let want = dbar / f_value(z, &poles);
        assert!((a_value(z, &poles) - want).norm() < 1e-6 * want.norm());
    }
}
