use std::sync::Arc;

use super::kernels::{convolve, Kernel};
use crate::error::Result;
use crate::grid::{ComplexGrid, Domain, Field};
use crate::C64;

/// Cauchy transform `Tf(z) = (1/π) ∫ f(ξ)/(z − ξ) dA(ξ)` evaluated at every
/// node of the source lattice. Matrix fields are transformed entrywise.
pub fn cauchy_transform(f: &Field) -> Result<Field> {
    cauchy_transform_on(f, f.grid_arc().clone())
}

/// Cauchy transform evaluated on an aligned target lattice.
pub fn cauchy_transform_on(f: &Field, target: Arc<ComplexGrid>) -> Result<Field> {
    apply(Kernel::Cauchy, f, target)
}

/// Beurling transform `Sh = p.v. −(1/π) ∫ h(ξ)/(z − ξ)² dA(ξ)`.
pub fn beurling_transform(h: &Field) -> Result<Field> {
    beurling_transform_on(h, h.grid_arc().clone())
}

pub fn beurling_transform_on(h: &Field, target: Arc<ComplexGrid>) -> Result<Field> {
    apply(Kernel::Beurling, h, target)
}

/// Logarithmic potential `∫ log|z − ξ| / 2π dμ(ξ)`.
pub fn newton_potential(f: &Field, target: Arc<ComplexGrid>) -> Result<Field> {
    apply(Kernel::Newton, f, target)
}

fn apply(kernel: Kernel, f: &Field, target: Arc<ComplexGrid>) -> Result<Field> {
    let parts = convolve(kernel, f, &target)?;
    let k = f.cell_len();
    let mut values = vec![C64::new(0.0, 0.0); target.len() * k];
    for (e, part) in parts.into_iter().enumerate() {
        for (t, v) in part.into_iter().enumerate() {
            values[t * k + e] = v;
        }
    }
    Field::new(target, f.rows(), f.cols(), values)
}

/// Rectangular lattice with the same spacing as `grid`, padded by `pad`
/// cells on every side.
pub fn padded_grid(grid: &ComplexGrid, pad: usize) -> ComplexGrid {
    let h = grid.spacing();
    let o = grid.origin();
    let shape: Vec<usize> = grid.shape().iter().map(|n| n + 2 * pad).collect();
    let lo = C64::new(o[0] - pad as f64 * h[0], o[1] - pad as f64 * h[1]);
    let hi = C64::new(
        lo.re + (shape[0] - 1) as f64 * h[0],
        lo.im + (shape[1] - 1) as f64 * h[1],
    );
    ComplexGrid::from_parts(
        Domain::rect(lo, hi),
        vec![lo.re, lo.im],
        h.to_vec(),
        shape,
        None,
    )
    .expect("padding a valid lattice")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::lp_norm;
    use std::f64::consts::PI;

    fn disc(res: usize) -> Arc<ComplexGrid> {
        Arc::new(ComplexGrid::build(Domain::unit_disc(), res).unwrap())
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = disc(32);
        let t = cauchy_transform(&Field::zeros(g, 1, 1)).unwrap();
        assert!(t.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn disc_indicator_potential() {
        let g = disc(129);
        let one = Field::constant(g.clone(), C64::new(1.0, 0.0));
        let big = Arc::new(padded_grid(&g, 96));
        let t = cauchy_transform_on(&one, big.clone()).unwrap();
        for i in 0..big.len() {
            let z = big.z(i);
            let r = z.norm();
            if (r - 1.0).abs() < 0.05 {
                continue;
            }
            let exact = if r < 1.0 { z.conj() } else { 1.0 / z };
            assert!((t.at(i) - exact).norm() < 2e-3 * exact.norm().max(0.1), "{z}");
        }
    }

    #[test]
    fn conjugate_moment_against_brute_force_quadrature() {
        // T(ξ̄)(z) evaluated by polar quadrature around the singularity.
        let g = disc(257);
        let f = Field::from_fn(g.clone(), |p| p[0].conj());
        let t = cauchy_transform(&f).unwrap();
        let oracle = |z: C64| {
            // split the unit disc into rings around z for the 1/(z-ξ) singularity
            let (nr, nt) = (400, 400);
            let rmax = 1.0 + z.norm();
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..nr {
                let rho = (a as f64 + 0.5) * rmax / nr as f64;
                for b in 0..nt {
                    let th = (b as f64 + 0.5) * 2.0 * PI / nt as f64;
                    let xi = z + C64::from_polar(rho, th);
                    if xi.norm() < 1.0 {
                        acc += xi.conj() / (z - xi) * rho;
                    }
                }
            }
            acc * (rmax / nr as f64) * (2.0 * PI / nt as f64) / PI
        };
        for i in [g.ravel(&[128, 128]), g.ravel(&[100, 150]), g.ravel(&[170, 90])] {
            let z = g.z(i);
            let exact = 0.5 * z.conj() * z.conj();
            assert!((t.at(i) - exact).norm() < 1e-4, "{} vs {}", t.at(i), exact);
            assert!((oracle(z) - exact).norm() < 5e-3);
        }
    }

    #[test]
    fn transform_is_linear() {
        let g = disc(64);
        let f = Field::from_fn(g.clone(), |p| (p[0] * 3.0).sin());
        let h = Field::from_fn(g.clone(), |p| p[0].conj().exp());
        let a = C64::new(0.7, -1.2);
        let b = C64::new(-2.0, 0.3);
        let lhs = cauchy_transform(&f.scale(a).add(&h.scale(b)).unwrap()).unwrap();
        let rhs = cauchy_transform(&f)
            .unwrap()
            .scale(a)
            .add(&cauchy_transform(&h).unwrap().scale(b))
            .unwrap();
        let d = lhs.sub(&rhs).unwrap();
        assert!(lp_norm(&d, f64::INFINITY, None).unwrap() < 1e-12);
    }
}
