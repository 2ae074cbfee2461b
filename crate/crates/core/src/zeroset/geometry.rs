use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::chart::ZeroChart;
use crate::error::{DbarError, Result};
use crate::grid::{ComplexGrid, Field, OneForm};
use crate::numeric::{bump, fit_line, pairwise_sum_complex};
use crate::C64;

/// Radius of the polydisc on which distances and test forms live.
pub const REGION_RADIUS: f64 = 0.25;
/// Pairings below this fraction of their normalisation count as zero.
pub const VANISHING_PAIRING: f64 = 1e-9;

fn in_region(p: [C64; 2]) -> bool {
    p[0].norm() < REGION_RADIUS && p[1].norm() < REGION_RADIUS
}

/// Sampled graph points binned by parameter lattice node, for ring search.
struct GraphIndex {
    shape: [usize; 2],
    origin: [f64; 2],
    spacing: [f64; 2],
    bins: Vec<Vec<(C64, C64)>>,
}

impl GraphIndex {
    fn new(chart: &ZeroChart) -> Self {
        let g = &chart.param_grid;
        let mut bins = vec![Vec::new(); g.len()];
        for s in &chart.slices {
            for r in &s.roots {
                bins[s.index].push((s.z1, r.z));
            }
        }
        GraphIndex {
            shape: [g.shape()[0], g.shape()[1]],
            origin: [g.origin()[0], g.origin()[1]],
            spacing: [g.spacing()[0], g.spacing()[1]],
            bins,
        }
    }

    /// Smallest squared Euclidean distance from `p` to a graph point.
    fn distance_sqr(&self, p: [C64; 2]) -> f64 {
        let node = |x: f64, a: usize| {
            let k = ((x - self.origin[a]) / self.spacing[a]).round();
            k.clamp(0.0, (self.shape[a] - 1) as f64) as i64
        };
        let (a0, b0) = (node(p[0].re, 0), node(p[0].im, 1));
        let hmin = self.spacing[0].min(self.spacing[1]);
        let reach = self.shape[0].max(self.shape[1]) as i64;
        let mut best = f64::INFINITY;
        for k in 0..=reach {
            // nodes on ring k are at least (k - 1/2) spacings away in z1
            let bound = (k as f64 - 0.5).max(0.0) * hmin;
            if bound * bound > best {
                break;
            }
            for a in a0 - k..=a0 + k {
                if a < 0 || a >= self.shape[0] as i64 {
                    continue;
                }
                let edge = (a - a0).abs() == k;
                let step = if edge || k == 0 { 1 } else { 2 * k as usize };
                for b in (b0 - k..=b0 + k).step_by(step) {
                    if b < 0 || b >= self.shape[1] as i64 {
                        continue;
                    }
                    for &(w1, r) in &self.bins[a as usize * self.shape[1] + b as usize] {
                        best = best.min((p[0] - w1).norm_sqr() + (p[1] - r).norm_sqr());
                    }
                }
            }
        }
        best
    }
}

/// Distance to the sampled zero set on the masked cells of `grid` inside
/// the region polydisc; `None` elsewhere.
pub fn graph_distance(grid: &ComplexGrid, chart: &ZeroChart) -> Vec<Option<f64>> {
    let index = GraphIndex::new(chart);
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            (grid.mask()[i] && in_region(p)).then(|| index.distance_sqr(p).sqrt())
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceComparison {
    #[serde(skip)]
    pub d: Field,
    #[serde(skip)]
    pub d_v: Field,
    /// Largest `d_v / d` over region cells with `d > 2h`.
    pub c1: f64,
    /// Whether `d ≤ d_v` held on every region cell.
    pub ordered: bool,
    pub cells: usize,
}

/// Euclidean versus vertical distance to a single graph `z2 = r(z1)`.
pub fn distance_comparison(f: &Field, chart: &ZeroChart) -> Result<DistanceComparison> {
    if chart.n != 1 {
        return Err(DbarError::UnsupportedChart(format!(
            "distance comparison needs a single graph, the chart has {} roots per slice",
            chart.n
        )));
    }
    let grid = f.grid_arc().clone();
    if grid.nvars() != 2 {
        return Err(DbarError::InvalidInput("distance comparison needs a two-variable grid".into()));
    }
    let index = GraphIndex::new(chart);
    let h = grid.max_spacing();
    let param = &chart.param_grid;
    let rows: Vec<Option<(f64, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            if !grid.mask()[i] || !in_region(p) {
                return None;
            }
            let (a, b) = param.nearest_node(0, p[0])?;
            let s = chart.slice_at(param.ravel(&[a, b]))?;
            let r = s.roots.first()?.z;
            // same expression as the Euclidean candidate at w1 = z1, so
            // d <= d_v holds without rounding slack
            let dv = ((p[0] - s.z1).norm_sqr() + (p[1] - r).norm_sqr()).sqrt();
            Some((index.distance_sqr(p).sqrt(), dv))
        })
        .collect();
    let zero = C64::new(0.0, 0.0);
    let mut d = vec![zero; grid.len()];
    let mut dv = vec![zero; grid.len()];
    let mut c1 = 0.0f64;
    let mut ordered = true;
    let mut cells = 0;
    for (i, row) in rows.iter().enumerate() {
        let Some((a, b)) = *row else { continue };
        d[i] = C64::new(a, 0.0);
        dv[i] = C64::new(b, 0.0);
        ordered &= a <= b;
        cells += 1;
        if a > 2.0 * h {
            c1 = c1.max(b / a);
        }
    }
    Ok(DistanceComparison {
        d: Field::scalar(grid.clone(), d)?,
        d_v: Field::scalar(grid, dv)?,
        c1,
        ordered,
        cells,
    })
}

/// Cutoff `χ_ε = χ(d/ε)` with `χ = 0` below `1/4` and `1` above `1`. The
/// profile's derivative rises linearly, stays flat, then falls, so that
/// `|χ'| ≤ 16/9 < 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CutoffSpec {
    pub eps: f64,
}

impl CutoffSpec {
    const LO: f64 = 0.25;
    const RAMP: f64 = 0.25;

    pub fn new(eps: f64) -> Self {
        CutoffSpec { eps }
    }

    /// The profile `χ(t)`.
    pub fn chi(t: f64) -> f64 {
        let u = ((t - Self::LO) / (1.0 - Self::LO)).clamp(0.0, 1.0);
        let (a, s) = (Self::RAMP, 1.0 / (1.0 - Self::RAMP));
        let v = if u < a {
            0.5 * s * u * u / a
        } else if u > 1.0 - a {
            1.0 - 0.5 * s * (1.0 - u) * (1.0 - u) / a
        } else {
            0.5 * s * a + s * (u - a)
        };
        v.clamp(0.0, 1.0)
    }

    /// `sup |χ'|`.
    pub fn max_slope() -> f64 {
        1.0 / ((1.0 - Self::RAMP) * (1.0 - Self::LO))
    }

    pub fn eval(&self, d: f64) -> f64 {
        Self::chi(d / self.eps)
    }
}

/// Seeded test function `ψ` supported in the region polydisc with its
/// analytic `∂ψ/∂z̄_j`.
#[derive(Clone, Debug)]
pub struct TestForm {
    centres: [C64; 2],
    radii: [f64; 2],
    coef: [C64; 5],
}

impl TestForm {
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let coef = [c(), c(), c(), c(), c()];
        let mut centres = [C64::new(0.0, 0.0); 2];
        let mut radii = [0.0; 2];
        for j in 0..2 {
            centres[j] = C64::new(rng.gen_range(-0.01..0.01), rng.gen_range(-0.01..0.01));
            radii[j] = rng.gen_range(0.2..0.235);
        }
        TestForm { centres, radii, coef }
    }

    fn poly(&self, p: [C64; 2]) -> C64 {
        let c = &self.coef;
        c[0] + c[1] * p[0] + c[2] * p[0].conj() + c[3] * p[1] + c[4] * p[1].conj()
    }

    fn bumps(&self, p: [C64; 2]) -> ([f64; 2], [C64; 2]) {
        let mut b = [0.0; 2];
        let mut db = [C64::new(0.0, 0.0); 2];
        for j in 0..2 {
            let w = p[j] - self.centres[j];
            let r2 = w.norm_sqr() / (self.radii[j] * self.radii[j]);
            b[j] = bump(r2);
            if r2 < 1.0 {
                // d/dz̄ of exp(-1/(1-t)) with t = |w|²/ρ²
                db[j] = -b[j] / ((1.0 - r2) * (1.0 - r2)) * w / (self.radii[j] * self.radii[j]);
            }
        }
        (b, db)
    }

    pub fn value(&self, p: [C64; 2]) -> C64 {
        let (b, _) = self.bumps(p);
        self.poly(p) * b[0] * b[1]
    }

    /// `(∂ψ/∂z̄1, ∂ψ/∂z̄2)`.
    pub fn dbar(&self, p: [C64; 2]) -> [C64; 2] {
        let (b, db) = self.bumps(p);
        let q = self.poly(p);
        [
            (self.coef[2] * b[0] + q * db[0]) * b[1],
            (self.coef[4] * b[1] + q * db[1]) * b[0],
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosednessReport {
    pub eps: Vec<f64>,
    /// Largest normalised `|∫ χ_ε (B1 ∂ψ/∂z̄2 − B2 ∂ψ/∂z̄1) dV|` over the
    /// test forms, per `ε`.
    pub pairings: Vec<f64>,
    /// Slope of `log pairing` against `log ε`; absent when the pairings
    /// vanish.
    pub decay_exponent: Option<f64>,
    pub vanishing: bool,
    pub pass: bool,
}

/// Pair the cut-off form `χ_ε B` with `∂̄` of seeded test forms for a
/// decreasing sequence of `ε`.
pub fn dbar_closedness_test(
    b: &OneForm,
    chart: &ZeroChart,
    eps: &[f64],
    seeds: u64,
) -> Result<ClosednessReport> {
    let grid: Arc<ComplexGrid> = b.components()[0].grid_arc().clone();
    if grid.nvars() != 2 {
        return Err(DbarError::InvalidInput("closedness test needs a two-variable grid".into()));
    }
    let h = grid.max_spacing();
    if eps.iter().any(|&e| e < 4.0 * h) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(DbarError::InvalidInput(format!(
            "ε values must decrease and stay at or above {}",
            4.0 * h
        )));
    }
    let dist = graph_distance(&grid, chart);
    let forms: Vec<TestForm> = (1..=seeds).map(TestForm::seeded).collect();
    let (b1, b2) = (b.component(0), b.component(1));
    let cells: Vec<usize> = (0..grid.len()).filter(|&i| dist[i].is_some()).collect();
    // discrete ∂̄ψ, so that summation by parts holds exactly on the grid
    let derivs: Vec<[Vec<C64>; 2]> = forms
        .iter()
        .map(|form| {
            let psi: Vec<C64> = (0..grid.len()).into_par_iter().map(|i| form.value(grid.point(i))).collect();
            [grid_dbar(&grid, &psi, 0), grid_dbar(&grid, &psi, 1)]
        })
        .collect();
    let mut pairings = Vec::with_capacity(eps.len());
    for &e in eps {
        let cut = CutoffSpec::new(e);
        let mut worst = 0.0f64;
        for dp in &derivs {
            let (terms, scale): (Vec<C64>, Vec<C64>) = cells
                .par_iter()
                .map(|&i| {
                    let w = grid.quad_weight(i);
                    let integrand = b1.at(i) * dp[1][i] - b2.at(i) * dp[0][i];
                    let chi = cut.eval(dist[i].expect("region cell"));
                    (integrand * (chi * w), C64::new(integrand.norm() * w, 0.0))
                })
                .unzip();
            let norm = pairwise_sum_complex(&scale).re;
            if norm > 0.0 {
                worst = worst.max(pairwise_sum_complex(&terms).norm() / norm);
            }
        }
        pairings.push(worst);
    }
    let vanishing = pairings.iter().all(|&p| p <= VANISHING_PAIRING);
    let decay_exponent = if vanishing {
        None
    } else {
        let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = pairings.iter().map(|p| p.max(f64::MIN_POSITIVE).ln()).collect();
        Some(fit_line(&xs, &ys).0)
    };
    let decreasing = pairings.windows(2).all(|w| w[1] <= w[0]);
    let pass = vanishing
        || (decreasing && pairings.last().copied().unwrap_or(0.0) <= 0.1 * pairings[0]);
    Ok(ClosednessReport {
        eps: eps.to_vec(),
        pairings,
        decay_exponent,
        vanishing,
        pass,
    })
}

/// Centred-difference `∂/∂z̄_{var+1}` of grid samples; zero on the
/// lattice boundary.
fn grid_dbar(grid: &ComplexGrid, values: &[C64], var: usize) -> Vec<C64> {
    let strides = grid.strides();
    let shape = grid.shape();
    let (ax, ay) = (2 * var, 2 * var + 1);
    let (hx, hy) = (grid.spacing()[ax], grid.spacing()[ay]);
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let idx = grid.unravel(i);
            if idx[ax] == 0 || idx[ax] + 1 == shape[ax] || idx[ay] == 0 || idx[ay] + 1 == shape[ay] {
                return C64::new(0.0, 0.0);
            }
            let dx = (values[i + strides[ax]] - values[i - strides[ax]]) / (2.0 * hx);
            let dy = (values[i + strides[ay]] - values[i - strides[ay]]) / (2.0 * hy);
            0.5 * (dx + C64::new(0.0, 1.0) * dy)
        })
        .collect()
}
