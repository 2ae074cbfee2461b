use serde::Serialize;

use super::polar::PolarSetSpec;
use super::{axis_neighbours, laplacian};
use crate::grid::Field;
use crate::C64;

/// Number of halvings in the regularization sequence `ε = 1, 1/2, …`.
pub const EPS_LEVELS: u32 = 10;
/// Relative round-off allowance of the sub-mean-value test.
const SUBMEAN_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct RadoReport {
    pub pass: bool,
    pub violations: usize,
    pub worst_cell: Option<usize>,
    pub worst_point: Option<C64>,
    /// Most negative five-point Laplacian of the regularized limit.
    pub worst_laplacian: f64,
    pub tolerance: f64,
    pub eps: Vec<f64>,
    /// `max |(v + ερ) − v|` off `E` for each `ε`.
    pub gaps: Vec<f64>,
    pub limit_gap: f64,
}

/// Regularize `v + ερ` as `ε → 0`, then run the discrete sub-mean-value
/// test on the limit. Marker cells of `E`, where `ρ = −∞`, take the upper
/// regularization: the mean of the four axis neighbours.
pub fn rado_subharmonic(v: &Field, e: &PolarSetSpec) -> RadoReport {
    let grid = v.grid();
    let rho = e.potential(v.grid_arc());
    let markers = e.markers(grid);
    let base: Vec<f64> = v.values().iter().map(|c| c.re).collect();
    let eps: Vec<f64> = (0..=EPS_LEVELS).map(|k| 0.5f64.powi(k as i32)).collect();
    let gaps: Vec<f64> = eps
        .iter()
        .map(|&t| {
            (0..grid.len())
                .filter(|&i| grid.mask()[i] && !markers[i])
                .map(|i| (t * rho.at(i).re).abs())
                .fold(0.0, f64::max)
        })
        .collect();

    // off E the sequence converges to v itself
    let mut limit = base.clone();
    for i in 0..grid.len() {
        if markers[i] {
            if let Some(nb) = axis_neighbours(grid, i) {
                limit[i] = nb.iter().map(|&j| base[j]).sum::<f64>() / 4.0;
            }
        }
    }
    let h = grid.max_spacing();
    let vmax = base
        .iter()
        .zip(grid.mask())
        .filter(|(_, &m)| m)
        .map(|(x, _)| x.abs())
        .fold(0.0, f64::max);
    let tolerance = SUBMEAN_SLACK * (vmax + 1.0) / (h * h);
    let lap = laplacian(grid, &limit);
    let mut worst = (None, f64::INFINITY);
    let mut violations = 0;
    for (i, l) in lap.iter().enumerate() {
        if let Some(l) = *l {
            if l < -tolerance {
                violations += 1;
            }
            if l < worst.1 {
                worst = (Some(i), l);
            }
        }
    }
    let worst_laplacian = if worst.0.is_some() { worst.1 } else { 0.0 };
    RadoReport {
        pass: violations == 0,
        violations,
        worst_cell: worst.0.filter(|_| violations > 0),
        worst_point: worst.0.filter(|_| violations > 0).map(|i| grid.z(i)),
        worst_laplacian,
        tolerance,
        limit_gap: *gaps.last().unwrap_or(&0.0),
        eps,
        gaps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ComplexGrid, Domain};
    use std::sync::Arc;

    #[test]
    fn regularization_gaps_halve() {
        let g = Arc::new(ComplexGrid::build(Domain::unit_disc(), 48).unwrap());
        let v = Field::from_fn(g, |p| C64::new(p[0].norm_sqr(), 0.0));
        let r = rado_subharmonic(&v, &PolarSetSpec::finite(vec![C64::new(0.0, 0.0)]));
        for w in r.gaps.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 1e-12);
        }
        assert!(r.pass);
    }
}
