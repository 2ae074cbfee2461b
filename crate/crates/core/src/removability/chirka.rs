use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::laplacian;
use crate::error::{DbarError, Result};
use crate::grid::{ComplexGrid, Domain};
use crate::C64;

/// Smallest admissible `Δ(ρ∘u)` off the pole.
pub const LEVI_TOLERANCE: f64 = 1e-6;
/// `|Z|` at or below this counts as the pole.
const POLE_RADIUS: f64 = 1e-12;

/// `ρ(Z) = log|Z − p| + A|Z − p|` on `ℂⁿ`, `n ≤ 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChirkaPotential {
    pub center: Vec<C64>,
    pub a: f64,
}

/// Polynomial disc `u_j(z) = Σ_k coeffs[j][k] z^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestDisc {
    pub coeffs: Vec<Vec<C64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChirkaReport {
    pub a: f64,
    pub discs: usize,
    /// Smallest `Δ(ρ∘u)` over all discs and cells off the pole.
    pub min_laplacian: f64,
    pub worst_disc: usize,
    pub worst_point: C64,
    pub pole_cells: usize,
    /// Smallest five-point Laplacian over cells whose stencil stays at
    /// least four spacings from the pole; a diagnostic only.
    pub discrete_min: f64,
    pub pass: bool,
}

impl TestDisc {
    /// Shift a disc vanishing at the origin so it passes through `p` there.
    pub fn through(p: &[C64], coeffs: Vec<Vec<C64>>) -> Self {
        let coeffs = coeffs
            .into_iter()
            .zip(p)
            .map(|(mut c, &pj)| {
                if c.is_empty() {
                    c.push(pj);
                } else {
                    c[0] += pj;
                }
                c
            })
            .collect();
        TestDisc { coeffs }
    }

    /// Value and derivative of every component.
    pub fn eval(&self, z: C64) -> (Vec<C64>, Vec<C64>) {
        self.coeffs
            .iter()
            .map(|c| {
                let mut v = C64::new(0.0, 0.0);
                let mut d = C64::new(0.0, 0.0);
                for &ck in c.iter().rev() {
                    d = d * z + v;
                    v = v * z + ck;
                }
                (v, d)
            })
            .unzip()
    }
}

/// Seeded holomorphic discs through `p` at the origin:
/// `u_j = p_j + Σ_{k=1..3} c_jk z^k` with `|c_jk| ≤ 1`.
pub fn disc_family(p: &[C64], count: usize, seed: u64) -> Vec<TestDisc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let coeffs = p
                .iter()
                .map(|_| {
                    let mut c = vec![C64::new(0.0, 0.0)];
                    for _ in 0..3 {
                        c.push(C64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU)));
                    }
                    c
                })
                .collect();
            TestDisc::through(p, coeffs)
        })
        .collect()
}

impl ChirkaPotential {
    pub fn new(center: Vec<C64>, a: f64) -> Result<Self> {
        if center.is_empty() || center.len() > 2 {
            return Err(DbarError::InvalidInput("Chirka potential needs 1 or 2 coordinates".into()));
        }
        if !(a >= 0.0) {
            return Err(DbarError::InvalidInput(format!("A = {a} must be nonnegative")));
        }
        Ok(ChirkaPotential { center, a })
    }

    pub fn eval(&self, z: &[C64]) -> f64 {
        let r = self.distance(z);
        if r == 0.0 {
            f64::NEG_INFINITY
        } else {
            r.ln() + self.a * r
        }
    }

    fn distance(&self, z: &[C64]) -> f64 {
        z.iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `Δ(ρ∘u)` at a point where `Z = u − p` and `ξ = u'`:
    /// `2 Σ_{j<k}|ξ_j Z_k − ξ_k Z_j|² / |Z|⁴ + A (2|ξ|²/|Z| − |⟨ξ,Z⟩|²/|Z|³)`.
    pub fn levi(&self, value: &[C64], derivative: &[C64]) -> Option<f64> {
        let zc: Vec<C64> = value.iter().zip(&self.center).map(|(u, p)| u - p).collect();
        let r2: f64 = zc.iter().map(|c| c.norm_sqr()).sum();
        let r = r2.sqrt();
        if r <= POLE_RADIUS {
            return None;
        }
        let xi2: f64 = derivative.iter().map(|c| c.norm_sqr()).sum();
        let inner: C64 = derivative.iter().zip(&zc).map(|(x, z)| x * z.conj()).sum();
        let mut wedge = 0.0;
        for j in 0..zc.len() {
            for k in j + 1..zc.len() {
                wedge += (derivative[j] * zc[k] - derivative[k] * zc[j]).norm_sqr();
            }
        }
        let log_part = 2.0 * wedge / (r2 * r2);
        let abs_part = self.a * (2.0 * xi2 / r - inner.norm_sqr() / (r2 * r));
        Some(log_part + abs_part)
    }

    /// Plurisubharmonicity along the discs, sampled at the cells of a
    /// unit-disc grid with `res` nodes per axis.
    pub fn psh_report(&self, discs: &[TestDisc], res: usize) -> Result<ChirkaReport> {
        let grid = Arc::new(ComplexGrid::build(Domain::unit_disc(), res)?);
        let h = grid.max_spacing();
        let mut min = f64::INFINITY;
        let mut worst = (0, C64::new(0.0, 0.0));
        let mut poles = 0;
        let mut discrete_min = f64::INFINITY;
        for (d, disc) in discs.iter().enumerate() {
            if disc.coeffs.len() != self.center.len() {
                return Err(DbarError::InvalidInput("disc and centre dimensions differ".into()));
            }
            let mut values = vec![0.0; grid.len()];
            let mut near_pole = vec![false; grid.len()];
            for i in (0..grid.len()).filter(|&i| grid.mask()[i]) {
                let (v, dv) = disc.eval(grid.z(i));
                values[i] = self.eval(&v);
                let speed = dv.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                near_pole[i] = self.distance(&v) <= 4.0 * h * (speed + 1.0);
                if !grid.center_inside(i) {
                    continue;
                }
                match self.levi(&v, &dv) {
                    Some(l) => {
                        if l < min {
                            min = l;
                            worst = (d, grid.z(i));
                        }
                    }
                    None => poles += 1,
                }
            }
            let lap = laplacian(&grid, &values);
            for i in 0..grid.len() {
                let clear = super::axis_neighbours(&grid, i)
                    .is_some_and(|nb| !near_pole[i] && nb.iter().all(|&j| !near_pole[j]));
                if let (Some(l), true) = (lap[i], clear && grid.center_inside(i)) {
                    discrete_min = discrete_min.min(l);
                }
            }
        }
        Ok(ChirkaReport {
            a: self.a,
            discs: discs.len(),
            min_laplacian: min,
            worst_disc: worst.0,
            worst_point: worst.1,
            pole_cells: poles,
            discrete_min,
            pass: min >= -LEVI_TOLERANCE,
        })
    }
}
