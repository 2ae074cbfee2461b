use std::sync::Arc;

use rayon::prelude::*;

use crate::grid::{ComplexGrid, Field, OneForm};
use crate::C64;

/// Derivative of `f` along real axis `axis`: centred differences where both
/// neighbours are masked, second-order one-sided stencils at the mask
/// boundary. The returned flags mark cells that used a one-sided stencil
/// (or none at all).
pub fn partial(f: &Field, axis: usize) -> (Field, Vec<bool>) {
    let grid = f.grid();
    let stride = grid.strides()[axis];
    let n = grid.shape()[axis];
    let h = grid.spacing()[axis];
    let k = f.cell_len();
    let mask = grid.mask();
    let zero = C64::new(0.0, 0.0);

    let cells: Vec<(Vec<C64>, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if !mask[i] {
                return (vec![zero; k], false);
            }
            let pos = grid.unravel(i)[axis];
            let ok = |steps: i64| {
                let p = pos as i64 + steps;
                p >= 0 && p < n as i64 && mask[(i as i64 + steps * stride as i64) as usize]
            };
            let at = |steps: i64, e: usize| f.values()[(i as i64 + steps * stride as i64) as usize * k + e];
            let mut out = vec![zero; k];
            let flagged = if ok(-1) && ok(1) {
                for (e, o) in out.iter_mut().enumerate() {
                    *o = (at(1, e) - at(-1, e)) / (2.0 * h);
                }
                false
            } else if ok(1) && ok(2) {
                for (e, o) in out.iter_mut().enumerate() {
                    *o = (-3.0 * at(0, e) + 4.0 * at(1, e) - at(2, e)) / (2.0 * h);
                }
                true
            } else if ok(-1) && ok(-2) {
                for (e, o) in out.iter_mut().enumerate() {
                    *o = (3.0 * at(0, e) - 4.0 * at(-1, e) + at(-2, e)) / (2.0 * h);
                }
                true
            } else if ok(1) {
                for (e, o) in out.iter_mut().enumerate() {
                    *o = (at(1, e) - at(0, e)) / h;
                }
                true
            } else if ok(-1) {
                for (e, o) in out.iter_mut().enumerate() {
                    *o = (at(0, e) - at(-1, e)) / h;
                }
                true
            } else {
                true
            };
            (out, flagged)
        })
        .collect();

    let mut values = Vec::with_capacity(grid.len() * k);
    let mut flags = Vec::with_capacity(grid.len());
    for (v, fl) in cells {
        values.extend(v);
        flags.push(fl);
    }
    (
        Field::new(f.grid_arc().clone(), f.rows(), f.cols(), values).expect("same layout"),
        flags,
    )
}

fn wirtinger(f: &Field, var: usize, sign: f64) -> (Field, Vec<bool>) {
    let (dx, fx) = partial(f, 2 * var);
    let (dy, fy) = partial(f, 2 * var + 1);
    let i = C64::new(0.0, sign);
    let d = dx.zip_map(&dy, |a, b| 0.5 * (a + i * b)).expect("same layout");
    let flags = fx.iter().zip(&fy).map(|(a, b)| *a || *b).collect();
    (d, flags)
}

/// `∂̄f` as a (0,1)-form together with one-sided-stencil flags.
pub fn dbar_flagged(f: &Field) -> (OneForm, Vec<bool>) {
    let n = f.grid().nvars();
    let mut comps = Vec::with_capacity(n);
    let mut flags = vec![false; f.grid().len()];
    for v in 0..n {
        let (d, fl) = wirtinger(f, v, 1.0);
        comps.push(d);
        for (a, b) in flags.iter_mut().zip(fl) {
            *a |= b;
        }
    }
    (OneForm::new(comps).expect("components share the grid"), flags)
}

/// Discrete Wirtinger derivative `∂̄_j f = (∂_x + i ∂_y) f / 2` per variable.
pub fn dbar(f: &Field) -> OneForm {
    dbar_flagged(f).0
}

/// `∂f/∂z_j = (∂_x − i ∂_y) f / 2` for variable `var`.
pub fn dz(f: &Field, var: usize) -> Field {
    wirtinger(f, var, -1.0).0
}

/// `∂f/∂z̄_j` for variable `var`.
pub fn dzbar(f: &Field, var: usize) -> Field {
    wirtinger(f, var, 1.0).0
}

/// Cells whose every neighbour within `depth` steps along each axis is
/// masked; residuals are usually measured there.
pub fn interior(grid: &ComplexGrid, depth: usize) -> Vec<bool> {
    let strides = grid.strides();
    (0..grid.len())
        .map(|i| {
            if !grid.mask()[i] {
                return false;
            }
            let idx = grid.unravel(i);
            (0..grid.axes()).all(|a| {
                (1..=depth as i64).all(|s| {
                    [-s, s].iter().all(|&st| {
                        let p = idx[a] as i64 + st;
                        p >= 0
                            && p < grid.shape()[a] as i64
                            && grid.mask()[(i as i64 + st * strides[a] as i64) as usize]
                    })
                })
            })
        })
        .collect()
}

/// The same grid with its mask restricted to the `depth`-interior.
pub fn interior_grid(grid: &ComplexGrid, depth: usize) -> Arc<ComplexGrid> {
    Arc::new(grid.with_mask(&interior(grid, depth)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{lp_norm, Domain};

    fn disc(res: usize) -> Arc<ComplexGrid> {
        Arc::new(ComplexGrid::build(Domain::unit_disc(), res).unwrap())
    }

    #[test]
    fn linear_and_holomorphic_inputs() {
        let g = disc(64);
        let conj = dzbar(&Field::from_fn(g.clone(), |p| p[0].conj()), 0);
        let sq = dzbar(&Field::from_fn(g.clone(), |p| p[0] * p[0]), 0);
        for i in 0..g.len() {
            if g.mask()[i] {
                assert!((conj.at(i) - 1.0).norm() < 1e-12);
            }
        }
        // one-sided stencils are exact on quadratics too
        assert!(lp_norm(&sq, f64::INFINITY, None).unwrap() < 1e-11);
    }

    #[test]
    fn second_order_convergence_on_exp_conj() {
        let mut errs = Vec::new();
        for res in [32, 64, 128] {
            let g = disc(res);
            let f = Field::from_fn(g.clone(), |p| p[0].conj().exp());
            let d = dzbar(&f, 0);
            let inner = interior(&g, 1);
            let mut worst = 0.0f64;
            for i in 0..g.len() {
                if inner[i] {
                    let e = f.at(i);
                    worst = worst.max((d.at(i) - e).norm() / e.norm());
                }
            }
            errs.push(worst);
        }
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{errs:?}");
    }

    #[test]
    fn two_variable_components() {
        let g = Arc::new(ComplexGrid::build(Domain::polydisc([1.0, 1.0]), 12).unwrap());
        let f = Field::from_fn(g.clone(), |p| p[0].conj() * 2.0 + p[1] * p[1].conj());
        let form = dbar(&f);
        for i in 0..g.len() {
            if g.mask()[i] {
                assert!((form.component(0).at(i) - 2.0).norm() < 1e-12);
                assert!((form.component(1).at(i) - g.point(i)[1]).norm() < 1e-12);
            }
        }
    }
}
