use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ComplexGrid, Field};
use crate::error::{DbarError, Result};
use crate::numeric::bump;
use crate::C64;

/// Mollifier `χ_δ(z) = χ(z/δ)/δ^{2n}` with the standard exponential bump as
/// profile. The tabulated stencil is normalised by its own quadrature, so
/// the discrete mass is one up to rounding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub delta: f64,
}

impl MollifierSpec {
    pub fn new(delta: f64) -> Self {
        MollifierSpec { delta }
    }

    /// Stencil as (per-axis offsets, weight) with weights summing to one.
    pub fn stencil(&self, grid: &ComplexGrid) -> Result<Vec<(Vec<i64>, f64)>> {
        let h = grid.max_spacing();
        if !(self.delta >= 2.0 * h) {
            return Err(DbarError::Resolution(format!(
                "mollifier radius {} below twice the spacing {h}",
                self.delta
            )));
        }
        let axes = grid.axes();
        let reach: Vec<i64> = grid
            .spacing()
            .iter()
            .map(|s| (self.delta / s).floor() as i64)
            .collect();
        let mut out = Vec::new();
        let mut off = vec![0i64; axes];
        for (a, r) in reach.iter().enumerate() {
            off[a] = -r;
        }
        loop {
            let r2: f64 = off
                .iter()
                .zip(grid.spacing())
                .map(|(&o, &s)| (o as f64 * s).powi(2))
                .sum::<f64>()
                / (self.delta * self.delta);
            let w = bump(r2);
            if w > 0.0 {
                out.push((off.clone(), w));
            }
            // odometer increment
            let mut a = axes;
            loop {
                if a == 0 {
                    let total: f64 = out.iter().map(|(_, w)| w).sum();
                    for e in &mut out {
                        e.1 /= total;
                    }
                    return Ok(out);
                }
                a -= 1;
                if off[a] < reach[a] {
                    off[a] += 1;
                    break;
                }
                off[a] = -reach[a];
            }
        }
    }
}

/// Convolution with the normalised bump. The result is masked to cells whose
/// whole stencil lies inside the input mask; other cells are zero.
pub fn mollify(f: &Field, spec: MollifierSpec) -> Result<Field> {
    let grid = f.grid();
    let stencil = spec.stencil(grid)?;
    let strides = grid.strides();
    let shape = grid.shape();
    let k = f.cell_len();
    let reach: Vec<i64> = (0..grid.axes())
        .map(|a| stencil.iter().map(|(o, _)| o[a].abs()).max().unwrap_or(0))
        .collect();
    let flat: Vec<(i64, f64)> = stencil
        .iter()
        .map(|(o, w)| {
            let d: i64 = o.iter().zip(&strides).map(|(&x, &s)| x * s as i64).sum();
            (d, *w)
        })
        .collect();

    let results: Vec<Option<Vec<C64>>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let idx = grid.unravel(i);
            for a in 0..grid.axes() {
                let x = idx[a] as i64;
                if x < reach[a] || x + reach[a] >= shape[a] as i64 {
                    return None;
                }
            }
            let mut acc = vec![C64::new(0.0, 0.0); k];
            for &(d, w) in &flat {
                let j = (i as i64 + d) as usize;
                if !grid.mask()[j] {
                    return None;
                }
                for (c, v) in acc.iter_mut().zip(f.cell(j)) {
                    *c += v * w;
                }
            }
            Some(acc)
        })
        .collect();

    let interior: Vec<bool> = results.iter().map(Option::is_some).collect();
    let out_grid = Arc::new(grid.with_mask(&interior));
    let mut values = Vec::with_capacity(grid.len() * k);
    for r in results {
        match r {
            Some(v) => values.extend(v),
            None => values.extend(std::iter::repeat(C64::new(0.0, 0.0)).take(k)),
        }
    }
    Field::new(out_grid, f.rows(), f.cols(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{lp_norm, Domain};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square(res: usize) -> Arc<ComplexGrid> {
        Arc::new(
            ComplexGrid::build(Domain::rect(C64::new(-1.0, -1.0), C64::new(1.0, 1.0)), res)
                .unwrap(),
        )
    }

    #[test]
    fn stencil_has_unit_mass() {
        let g = square(64);
        let s = MollifierSpec::new(0.1).stencil(&g).unwrap();
        let total: f64 = s.iter().map(|e| e.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_small_radius_is_rejected() {
        let g = square(64);
        assert!(matches!(
            mollify(&Field::constant(g, C64::new(1.0, 0.0)), MollifierSpec::new(0.01)),
            Err(DbarError::Resolution(_))
        ));
    }

    #[test]
    fn constants_and_linear_functions_are_preserved() {
        let g = square(64);
        let c = mollify(&Field::constant(g.clone(), C64::new(2.0, -1.0)), MollifierSpec::new(0.1))
            .unwrap();
        let lin = mollify(&Field::from_fn(g.clone(), |p| C64::new(p[0].re, 0.0)), MollifierSpec::new(0.1))
            .unwrap();
        for i in 0..g.len() {
            if c.grid().mask()[i] {
                assert!((c.at(i) - C64::new(2.0, -1.0)).norm() < 1e-12);
                assert!((lin.at(i).re - g.z(i).re).abs() < 1e-12);
            }
        }
        assert!(c.grid().masked_count() > 0);
    }

    #[test]
    fn noise_l2_does_not_increase() {
        let g = square(64);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vals = (0..g.len())
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let f = Field::scalar(g, vals).unwrap();
        let m = mollify(&f, MollifierSpec::new(0.1)).unwrap();
        assert!(lp_norm(&m, 2.0, None).unwrap() <= lp_norm(&f, 2.0, None).unwrap());
    }
}
