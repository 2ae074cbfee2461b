use serde::Serialize;

use super::chart::ZeroChart;
use crate::error::{DbarError, Result};
use crate::grid::Field;
use crate::C64;

/// Roots closer than this many slice spacings are treated as one.
pub const DISTINCT_SPACINGS: f64 = 4.0;

/// Distinct representatives of the roots of one slice, merging roots
/// within `DISTINCT_SPACINGS` lattice spacings (first occurrence kept).
pub fn distinct_roots(roots: &[C64], spacing: f64) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::new();
    for &r in roots {
        if out.iter().all(|&q| (q - r).norm() >= DISTINCT_SPACINGS * spacing) {
            out.push(r);
        }
    }
    out
}

fn max_distinct(chart: &ZeroChart) -> usize {
    chart
        .slices
        .iter()
        .map(|s| distinct_roots(&s.expanded(), chart.spacing).len())
        .max()
        .unwrap_or(0)
}

/// `h(z1) = Π_{α≠β} (r_α − r_β)` over the `k` distinct roots on slices
/// where `k` distinct roots exist, and `0` on the other parameter cells.
pub fn discriminant_h(chart: &ZeroChart) -> Field {
    let k = max_distinct(chart);
    let grid = chart.param_grid.clone();
    let mut values = vec![C64::new(0.0, 0.0); grid.len()];
    for s in &chart.slices {
        let d = distinct_roots(&s.expanded(), chart.spacing);
        if d.len() == k {
            values[s.index] = ordered_pair_product(&d);
        }
    }
    Field::scalar(grid, values).expect("one value per parameter cell")
}

fn ordered_pair_product(r: &[C64]) -> C64 {
    let mut p = C64::new(1.0, 0.0);
    for (a, &ra) in r.iter().enumerate() {
        for (b, &rb) in r.iter().enumerate() {
            if a != b {
                p *= ra - rb;
            }
        }
    }
    p
}

/// Elementary symmetric functions `e_1 … e_k` of a root list.
pub fn elementary_symmetric(roots: &[C64]) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); roots.len() + 1];
    e[0] = C64::new(1.0, 0.0);
    for (n, &r) in roots.iter().enumerate() {
        for j in (1..=n + 1).rev() {
            let prev = e[j - 1];
            e[j] += prev * r;
        }
    }
    e.remove(0);
    e
}

#[derive(Clone, Debug, Serialize)]
pub struct WeierstrassPolynomial {
    pub degree: usize,
    /// `e_1 … e_k` on the parameter grid, zero where `h` vanishes.
    #[serde(skip)]
    pub coefficients: Vec<Field>,
    /// Parameter cells on which the coefficients are defined.
    #[serde(skip)]
    pub valid: Vec<bool>,
    /// Max `|∂e_j/∂z̄1|` per coefficient over valid cells whose centred
    /// stencil is valid.
    pub dbar_residuals: Vec<f64>,
}

impl WeierstrassPolynomial {
    /// `P(z1, z2) = z2^k − e_1 z2^{k−1} + e_2 z2^{k−2} − …` at parameter
    /// cell `index`, or `None` where the coefficients are undefined.
    pub fn eval(&self, index: usize, z2: C64) -> Option<C64> {
        if !self.valid.get(index).copied().unwrap_or(false) {
            return None;
        }
        let mut acc = C64::new(1.0, 0.0);
        let mut sign = -1.0;
        for e in &self.coefficients {
            acc = acc * z2 + sign * e.at(index);
            sign = -sign;
        }
        Some(acc)
    }
}

/// Build `P = Π (z2 − r_α)` over the distinct roots on slices where the
/// discriminant is nonzero.
pub fn weierstrass_reconstruct(chart: &ZeroChart) -> Result<WeierstrassPolynomial> {
    let h = discriminant_h(chart);
    let grid = chart.param_grid.clone();
    let valid: Vec<bool> = (0..grid.len()).map(|i| h.at(i) != C64::new(0.0, 0.0)).collect();
    if !valid.iter().any(|&v| v) {
        return Err(DbarError::DegenerateChart);
    }
    let k = max_distinct(chart);
    let mut coef = vec![vec![C64::new(0.0, 0.0); grid.len()]; k];
    for s in &chart.slices {
        if valid[s.index] {
            let e = elementary_symmetric(&distinct_roots(&s.expanded(), chart.spacing));
            for (j, v) in e.into_iter().enumerate() {
                coef[j][s.index] = v;
            }
        }
    }
    let coefficients: Vec<Field> = coef
        .into_iter()
        .map(|v| Field::scalar(grid.clone(), v).expect("one value per parameter cell"))
        .collect();
    let dbar_residuals = coefficients
        .iter()
        .map(|e| dbar_residual(e, &valid))
        .collect();
    Ok(WeierstrassPolynomial {
        degree: k,
        coefficients,
        valid,
        dbar_residuals,
    })
}

/// Centred-difference `|∂/∂z̄|` maximised over cells whose four neighbours
/// are valid.
pub(crate) fn dbar_residual(e: &Field, valid: &[bool]) -> f64 {
    let g = e.grid();
    let (nx, ny) = (g.shape()[0], g.shape()[1]);
    let (hx, hy) = (g.spacing()[0], g.spacing()[1]);
    let mut worst = 0.0f64;
    for a in 1..nx.saturating_sub(1) {
        for b in 1..ny.saturating_sub(1) {
            let i = g.ravel(&[a, b]);
            let nb = [
                g.ravel(&[a - 1, b]),
                g.ravel(&[a + 1, b]),
                g.ravel(&[a, b - 1]),
                g.ravel(&[a, b + 1]),
            ];
            if !valid[i] || nb.iter().any(|&j| !valid[j]) {
                continue;
            }
            let dx = (e.at(nb[1]) - e.at(nb[0])) / (2.0 * hx);
            let dy = (e.at(nb[3]) - e.at(nb[2])) / (2.0 * hy);
            worst = worst.max((0.5 * (dx + C64::new(0.0, 1.0) * dy)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_functions_follow_vieta() {
        let r = [C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 0.0)];
        let e = elementary_symmetric(&r);
        assert_eq!(e, vec![C64::new(6.0, 0.0), C64::new(11.0, 0.0), C64::new(6.0, 0.0)]);
    }

    #[test]
    fn pair_product_of_symmetric_roots() {
        let r = [C64::new(0.1, 0.0), C64::new(-0.1, 0.0)];
        assert!((ordered_pair_product(&r) - C64::new(-0.04, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn close_roots_merge() {
        let r = [C64::new(0.0, 0.0), C64::new(0.01, 0.0), C64::new(0.5, 0.0)];
        assert_eq!(distinct_roots(&r, 0.01).len(), 2);
    }
}
