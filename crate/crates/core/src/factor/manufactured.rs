use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{ComplexGrid, Field, OneForm};
use crate::C64;

/// A system `∂̄f = A f` with known solution `f = E ψ v`, where
/// `E = [[e^{w1}, φ], [0, e^{w2}]]`, `ψ` is a polynomial with prescribed
/// roots and `v = (1, 1)`, so that `A = (∂̄E) E^{-1}`.
#[derive(Clone, Debug)]
pub struct ManufacturedSystem {
    pub f: Field,
    pub a: OneForm,
    /// Roots of `ψ`, the zeros of `f`.
    pub zeros: Vec<C64>,
}

/// `w = c0 z̄ + c1 z z̄ + c2 z̄²` and its `∂̄`.
#[derive(Clone, Copy)]
struct Quadratic([C64; 3]);

impl Quadratic {
    fn draw(rng: &mut ChaCha8Rng, scale: f64) -> Self {
        let mut c = [C64::new(0.0, 0.0); 3];
        for v in &mut c {
            *v = scale * C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        Quadratic(c)
    }

    fn value(&self, z: C64) -> C64 {
        let w = z.conj();
        self.0[0] * w + self.0[1] * z * w + self.0[2] * w * w
    }

    fn dbar(&self, z: C64) -> C64 {
        self.0[0] + self.0[1] * z + 2.0 * self.0[2] * z.conj()
    }
}

/// Seeded 2×2 instance on a disc grid. Coefficient moduli scale with
/// `scale`; one or two simple zeros lie within `0.6 r` of the centre.
pub fn manufactured_system(grid: &Arc<ComplexGrid>, seed: u64, scale: f64) -> Result<ManufacturedSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (centre, r) = match grid.domain() {
        crate::grid::Domain::Disc { center, radius } => (*center, *radius),
        _ => {
            return Err(crate::DbarError::InvalidInput(
                "manufactured systems live on a disc".into(),
            ))
        }
    };
    let [w1, w2, phi] = [0, 1, 2].map(|_| Quadratic::draw(&mut rng, scale));
    let count = rng.gen_range(1..=2);
    let mut zeros = Vec::new();
    while zeros.len() < count {
        let z = centre
            + C64::from_polar(r * rng.gen_range(0.1..0.6), rng.gen_range(0.0..std::f64::consts::TAU));
        if zeros.iter().all(|q: &C64| (q - z).norm() > 0.2 * r) {
            zeros.push(z);
        }
    }
    let roots = zeros.clone();
    let f = Field::from_fn_matrix(grid.clone(), 2, 1, move |p, out| {
        let z = p[0];
        let psi: C64 = roots.iter().map(|&q| z - q).product();
        out[0] = psi * (w1.value(z).exp() + phi.value(z));
        out[1] = psi * w2.value(z).exp();
    });
    let a = Field::from_fn_matrix(grid.clone(), 2, 2, move |p, out| {
        let z = p[0];
        let e2 = (-w2.value(z)).exp();
        out[0] = w1.dbar(z);
        out[1] = (phi.dbar(z) - w1.dbar(z) * phi.value(z)) * e2;
        out[2] = C64::new(0.0, 0.0);
        out[3] = w2.dbar(z);
    });
    Ok(ManufacturedSystem {
        f,
        a: OneForm::single(a)?,
        zeros,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;
    use crate::transforms::dzbar;

    #[test]
    fn coefficient_matches_the_solution() {
        let g = Arc::new(ComplexGrid::build(Domain::disc(C64::new(0.0, 0.0), 0.5), 96).unwrap());
        let s = manufactured_system(&g, 3, 0.1).unwrap();
        let d = dzbar(&s.f, 0);
        let a = s.a.component(0);
        let mut worst = 0.0f64;
        for i in 0..g.len() {
            if g.z(i).norm() < 0.4 {
                let (fc, ac, dc) = (s.f.cell(i), a.cell(i), d.cell(i));
                for r in 0..2 {
                    let af = ac[2 * r] * fc[0] + ac[2 * r + 1] * fc[1];
                    worst = worst.max((af - dc[r]).norm());
                }
            }
        }
        assert!(worst < 1e-3, "{worst}");
    }
}
