//! Tensor-product Lagrange interpolation of one-variable scalar fields.

use super::Field;
use crate::C64;

/// Number of nodes per axis used by the interpolant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Cubic,
    Quintic,
}

impl Order {
    fn points(self) -> usize {
        match self {
            Order::Cubic => 4,
            Order::Quintic => 6,
        }
    }
}

fn weights(t: f64, start: i64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| {
            let xj = (start + j as i64) as f64;
            (0..m)
                .filter(|&l| l != j)
                .map(|l| {
                    let xl = (start + l as i64) as f64;
                    (t - xl) / (xj - xl)
                })
                .product()
        })
        .collect()
}

/// Value of the interpolant at `z`, or `None` outside the lattice. Stencils
/// are shifted inwards near the edges.
pub fn interpolate(f: &Field, z: C64, order: Order) -> Option<C64> {
    let g = f.grid();
    let m = order.points();
    let tx = g.lattice_coord(0, z.re);
    let ty = g.lattice_coord(1, z.im);
    let (nx, ny) = (g.shape()[0] as f64, g.shape()[1] as f64);
    if tx < -1e-9 || ty < -1e-9 || tx > nx - 1.0 + 1e-9 || ty > ny - 1.0 + 1e-9 {
        return None;
    }
    let start = |t: f64, n: usize| {
        let s = t.floor() as i64 - (m as i64 / 2 - 1);
        s.clamp(0, n as i64 - m as i64)
    };
    let (sx, sy) = (start(tx, g.shape()[0]), start(ty, g.shape()[1]));
    let (wx, wy) = (weights(tx, sx, m), weights(ty, sy, m));
    let mut acc = C64::new(0.0, 0.0);
    for (a, wa) in wx.iter().enumerate() {
        for (b, wb) in wy.iter().enumerate() {
            let i = g.ravel(&[(sx + a as i64) as usize, (sy + b as i64) as usize]);
            acc += f.at(i) * (wa * wb);
        }
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ComplexGrid, Domain};
    use std::sync::Arc;

    #[test]
    fn reproduces_low_degree_polynomials() {
        let g = Arc::new(ComplexGrid::build(Domain::unit_disc(), 32).unwrap());
        let f = Field::from_fn(g, |p| p[0] * p[0] * p[0] + p[0].conj());
        for z in [C64::new(0.123, -0.456), C64::new(-0.99, 0.98), C64::new(0.0, 0.0)] {
            let exact = z * z * z + z.conj();
            assert!((interpolate(&f, z, Order::Cubic).unwrap() - exact).norm() < 1e-12);
            assert!((interpolate(&f, z, Order::Quintic).unwrap() - exact).norm() < 1e-12);
        }
        assert!(interpolate(&f, C64::new(1.5, 0.0), Order::Cubic).is_none());
    }
}
