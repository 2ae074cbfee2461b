use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cauchy::{beurling_transform, cauchy_transform};
use crate::error::{DbarError, Result};
use crate::grid::{lp_norm, ComplexGrid, Field};
use crate::numeric::bump;
use crate::C64;

pub const MAX_ITERATIONS: usize = 200;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// `h + α (S h + H') = g` for `h = ∂u/∂z̄`, where `H'` is the derivative of
/// an optional holomorphic part of `u` (zero when absent).
#[derive(Clone, Debug)]
pub struct BeltramiProblem {
    pub alpha: Field,
    pub g: Field,
    pub r: f64,
    pub holomorphic_dz: Option<Field>,
    pub tolerance: f64,
}

impl BeltramiProblem {
    pub fn new(alpha: Field, g: Field) -> Self {
        BeltramiProblem {
            alpha,
            g,
            r: 2.0,
            holomorphic_dz: None,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_holomorphic_dz(mut self, dz: Field) -> Self {
        self.holomorphic_dz = Some(dz);
        self
    }

    pub fn with_exponent(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    /// `sup |α|` over the mask.
    pub fn c0(&self) -> f64 {
        lp_norm(&self.alpha, f64::INFINITY, None).unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Debug)]
pub struct BeltramiSolution {
    pub u_zbar: Field,
    pub u: Field,
    pub iterations: usize,
    /// Geometric mean of successive residual ratios.
    pub ratio: f64,
    pub residuals: Vec<f64>,
    /// Operator-norm estimate of S in `L^r` used for the admissibility check.
    pub epsilon_r: f64,
}

pub fn beltrami_solve(problem: &BeltramiProblem) -> Result<BeltramiSolution> {
    let c0 = problem.c0();
    let grid = problem.g.grid_arc().clone();
    let epsilon_r = if problem.r == 2.0 {
        1.0
    } else {
        beurling_norm_estimate(&grid, problem.r, 8, 1)?
    };
    if c0 * epsilon_r >= 1.0 {
        return Err(DbarError::NonContractive {
            c0,
            limit: 1.0 / epsilon_r,
        });
    }
    let g = problem.g.masked();
    let alpha = problem.alpha.masked();
    let shift = match &problem.holomorphic_dz {
        Some(d) => alpha.zip_map(&d.masked(), |a, b| a * b)?,
        None => Field::zeros(grid.clone(), 1, 1),
    };
    let rhs = g.sub(&shift)?.masked();
    let gnorm = lp_norm(&rhs, 2.0, None)?;

    let mut h = rhs.clone();
    let mut residuals = Vec::new();
    let mut converged = gnorm == 0.0;
    let mut iterations = 0;
    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let sh = beurling_transform(&h)?;
        let next = rhs.zip_map(&alpha.zip_map(&sh, |a, s| a * s)?, |r, x| r - x)?.masked();
        let res = lp_norm(&next.sub(&h)?, 2.0, None)? / gnorm;
        residuals.push(res);
        h = next;
        if res <= problem.tolerance {
            converged = true;
        } else if !res.is_finite() {
            break;
        }
    }
    if !converged {
        return Err(DbarError::Divergence {
            iterations,
            last: residuals.last().copied().unwrap_or(f64::NAN),
            history: residuals,
        });
    }
    let ratio = contraction_ratio(&residuals);

    let mut u = cauchy_transform(&h)?;
    if let Some(d) = &problem.holomorphic_dz {
        let hol = integrate_holomorphic(d, 8)?;
        u = u.add(&hol)?;
    }
    Ok(BeltramiSolution {
        u_zbar: h,
        u,
        iterations: iterations.max(1),
        ratio,
        residuals,
        epsilon_r,
    })
}

fn contraction_ratio(residuals: &[f64]) -> f64 {
    let usable: Vec<f64> = residuals.iter().cloned().filter(|&r| r > 1e-14).collect();
    if usable.len() < 2 {
        return 0.0;
    }
    let n = usable.len() - 1;
    (usable[n] / usable[0]).powf(1.0 / n as f64)
}

/// Least-squares polynomial fit of a holomorphic derivative on the mask,
/// integrated termwise with zero constant.
pub fn integrate_holomorphic(dz: &Field, degree: usize) -> Result<Field> {
    let grid = dz.grid();
    let cells: Vec<usize> = (0..grid.len()).filter(|&i| grid.mask()[i]).collect();
    let m = degree + 1;
    // Normal equations in the monomial basis, scaled by the domain radius.
    let scale = cells
        .iter()
        .map(|&i| grid.z(i).norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut ata = vec![C64::new(0.0, 0.0); m * m];
    let mut atb = vec![C64::new(0.0, 0.0); m];
    for &i in &cells {
        let w = grid.quad_weight(i);
        let z = grid.z(i) / scale;
        let pows: Vec<C64> = (0..m).map(|k| z.powu(k as u32)).collect();
        for a in 0..m {
            for b in 0..m {
                ata[a * m + b] += pows[a].conj() * pows[b] * w;
            }
            atb[a] += pows[a].conj() * dz.at(i) * w;
        }
    }
    let coef = solve_dense(&mut ata, &mut atb, m)?;
    Ok(Field::from_fn(dz.grid_arc().clone(), |p| {
        let z = p[0] / scale;
        coef.iter()
            .enumerate()
            .map(|(k, c)| c * z.powu(k as u32 + 1) * (scale / (k as f64 + 1.0)))
            .sum()
    }))
}

/// Gaussian elimination with partial pivoting.
pub(crate) fn solve_dense(a: &mut [C64], b: &mut [C64], n: usize) -> Result<Vec<C64>> {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
            .unwrap();
        if a[piv * n + col].norm() < 1e-300 {
            return Err(DbarError::InvalidInput("singular linear system".into()));
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row * n + k] * x[k];
        }
        x[row] = s / a[row * n + row];
    }
    Ok(x)
}

/// Seeded smooth test function on a one-variable grid: a random polynomial
/// in `z, z̄` times a bump supported in the domain's inscribed disc.
pub fn smooth_test_function(grid: &std::sync::Arc<ComplexGrid>, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef: Vec<C64> = (0..6)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let c = C64::new(rng.gen_range(-0.15..0.15), rng.gen_range(-0.15..0.15));
    let rad = rng.gen_range(0.55..0.75);
    Field::from_fn(grid.clone(), move |p| {
        let z = p[0];
        let poly = coef[0]
            + coef[1] * z
            + coef[2] * z.conj()
            + coef[3] * z * z
            + coef[4] * z * z.conj()
            + coef[5] * z.conj() * z.conj();
        poly * bump((z - c).norm_sqr() / (rad * rad))
    })
}

/// Empirical `L^r` operator norm of the discrete Beurling transform on the
/// grid: power iteration for `r = 2`, otherwise the largest ratio over
/// seeded smooth probes.
pub fn beurling_norm_estimate(
    grid: &std::sync::Arc<ComplexGrid>,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if r == 2.0 {
        let mut v = smooth_test_function(grid, seed);
        let mut est = 0.0;
        for _ in 0..20 {
            let n = lp_norm(&v, 2.0, None)?;
            v = v.scale(C64::new(1.0 / n, 0.0));
            let sv = beurling_transform(&v)?.masked();
            let back = beurling_transform(&sv.map(|x| x.conj()))?
                .masked()
                .map(|x| x.conj());
            est = lp_norm(&back, 2.0, None)?.sqrt();
            v = back;
        }
        return Ok(est);
    }
    let mut best = 0.0f64;
    for s in 0..samples as u64 {
        let v = smooth_test_function(grid, seed.wrapping_add(s));
        let sv = beurling_transform(&v)?.masked();
        best = best.max(lp_norm(&sv, r, None)? / lp_norm(&v, r, None)?);
    }
    Ok(best)
}
