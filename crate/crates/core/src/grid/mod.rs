//! Lattices over discs, rectangles and polydiscs, and the sampled fields
//! that live on them.
//!
//! A grid carries one real axis per real coordinate: `(x, y)` for one complex
//! variable, `(x1, y1, x2, y2)` for two. Cells are centred on lattice nodes;
//! every integral is a midpoint sum weighted by the exact fraction of the
//! cell lying inside the domain.

mod field;
pub mod format;
pub mod interp;
mod mollify;
mod norms;
mod slice;

pub use field::{Field, OneForm};
pub use mollify::{mollify, MollifierSpec};
pub use norms::{holder_norm, lp_norm, Exponent, HOLDER_PAIR_CAP};
pub use slice::{embed, slice, LineAxis};

use crate::error::{DbarError, Result};
use crate::numeric::disc_rect_area;
use crate::C64;
use serde::{Deserialize, Serialize};

/// Minimum number of nodes per axis accepted by [`ComplexGrid::build`].
pub const MIN_RESOLUTION: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    Disc { center: C64, radius: f64 },
    Rect { lo: C64, hi: C64 },
    Polydisc { centers: [C64; 2], radii: [f64; 2] },
    Polyrect { lo: [C64; 2], hi: [C64; 2] },
}

impl Domain {
    pub fn disc(center: C64, radius: f64) -> Self {
        Domain::Disc { center, radius }
    }

    pub fn unit_disc() -> Self {
        Domain::disc(C64::new(0.0, 0.0), 1.0)
    }

    pub fn rect(lo: C64, hi: C64) -> Self {
        Domain::Rect { lo, hi }
    }

    /// Polydisc centred at the origin.
    pub fn polydisc(radii: [f64; 2]) -> Self {
        Domain::Polydisc {
            centers: [C64::new(0.0, 0.0); 2],
            radii,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Domain::Disc { .. } => "disc",
            Domain::Rect { .. } => "rect",
            Domain::Polydisc { .. } => "polydisc",
            Domain::Polyrect { .. } => "polyrect",
        }
    }

    pub fn nvars(&self) -> usize {
        match self {
            Domain::Disc { .. } | Domain::Rect { .. } => 1,
            _ => 2,
        }
    }

    /// The one-variable factor for coordinate `var` (0 or 1).
    pub fn factor(&self, var: usize) -> Domain {
        match self {
            Domain::Polydisc { centers, radii } => Domain::disc(centers[var], radii[var]),
            Domain::Polyrect { lo, hi } => Domain::rect(lo[var], hi[var]),
            other => other.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(DbarError::InvalidDomain(msg));
        match self {
            Domain::Disc { radius, .. } if !(*radius > 0.0) => {
                bad(format!("radius {radius} must be positive"))
            }
            Domain::Rect { lo, hi } if !(hi.re > lo.re && hi.im > lo.im) => {
                bad(format!("rectangle [{lo}, {hi}] has non-positive extent"))
            }
            Domain::Polydisc { radii, .. } if !(radii[0] > 0.0 && radii[1] > 0.0) => {
                bad(format!("radii {radii:?} must be positive"))
            }
            Domain::Polyrect { lo, hi } => {
                for v in 0..2 {
                    Domain::rect(lo[v], hi[v]).validate()?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Bounding box per real axis as `(lo, hi)`.
    fn bounds(&self) -> Vec<(f64, f64)> {
        match self {
            Domain::Disc { center, radius } => vec![
                (center.re - radius, center.re + radius),
                (center.im - radius, center.im + radius),
            ],
            Domain::Rect { lo, hi } => vec![(lo.re, hi.re), (lo.im, hi.im)],
            Domain::Polydisc { .. } | Domain::Polyrect { .. } => {
                let mut b = self.factor(0).bounds();
                b.extend(self.factor(1).bounds());
                b
            }
        }
    }

    /// Whether a point (one complex coordinate per variable) lies in the
    /// closed domain.
    pub fn contains(&self, point: &[C64]) -> bool {
        match self {
            Domain::Disc { center, radius } => (point[0] - center).norm() <= *radius,
            Domain::Rect { lo, hi } => {
                let z = point[0];
                z.re >= lo.re && z.re <= hi.re && z.im >= lo.im && z.im <= hi.im
            }
            _ => self.factor(0).contains(&point[0..1]) && self.factor(1).contains(&point[1..2]),
        }
    }

    /// Fraction of the cell centred at `point` with the given per-axis
    /// spacing that lies inside the domain.
    fn cell_fraction(&self, point: &[C64], spacing: &[f64]) -> f64 {
        match self {
            Domain::Disc { center, radius } => {
                let (hx, hy) = (spacing[0], spacing[1]);
                let z = point[0];
                disc_rect_area(
                    *center,
                    *radius,
                    z.re - 0.5 * hx,
                    z.re + 0.5 * hx,
                    z.im - 0.5 * hy,
                    z.im + 0.5 * hy,
                ) / (hx * hy)
            }
            Domain::Rect { lo, hi } => {
                let z = point[0];
                let overlap = |c: f64, h: f64, a: f64, b: f64| {
                    ((c + 0.5 * h).min(b) - (c - 0.5 * h).max(a)).max(0.0) / h
                };
                overlap(z.re, spacing[0], lo.re, hi.re) * overlap(z.im, spacing[1], lo.im, hi.im)
            }
            _ => {
                self.factor(0).cell_fraction(&point[0..1], &spacing[0..2])
                    * self.factor(1).cell_fraction(&point[1..2], &spacing[2..4])
            }
        }
    }
}

/// Rectangular lattice over a domain in C or C^2.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexGrid {
    domain: Domain,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    shape: Vec<usize>,
    mask: Vec<bool>,
    weights: Vec<f64>,
}

impl ComplexGrid {
    /// Lattice with `resolution` nodes per real axis spanning the domain's
    /// bounding box, endpoints included.
    pub fn build(domain: Domain, resolution: usize) -> Result<Self> {
        let axes = 2 * domain.nvars();
        Self::build_with_shape(domain, &vec![resolution; axes])
    }

    pub fn build_with_shape(domain: Domain, shape: &[usize]) -> Result<Self> {
        domain.validate()?;
        let bounds = domain.bounds();
        if shape.len() != bounds.len() {
            return Err(DbarError::InvalidInput(format!(
                "shape has {} axes, domain needs {}",
                shape.len(),
                bounds.len()
            )));
        }
        if let Some(&n) = shape.iter().find(|&&n| n < MIN_RESOLUTION) {
            return Err(DbarError::Resolution(format!(
                "resolution {n} below minimum {MIN_RESOLUTION}"
            )));
        }
        let origin: Vec<f64> = bounds.iter().map(|b| b.0).collect();
        let spacing: Vec<f64> = bounds
            .iter()
            .zip(shape)
            .map(|(b, &n)| (b.1 - b.0) / (n - 1) as f64)
            .collect();
        let mut grid = ComplexGrid {
            domain,
            origin,
            spacing,
            shape: shape.to_vec(),
            mask: Vec::new(),
            weights: Vec::new(),
        };
        grid.recompute_weights();
        Ok(grid)
    }

    /// A grid with explicit lattice parameters; weights are recomputed from
    /// the domain and then restricted to `mask` when given.
    pub fn from_parts(
        domain: Domain,
        origin: Vec<f64>,
        spacing: Vec<f64>,
        shape: Vec<usize>,
        mask: Option<Vec<bool>>,
    ) -> Result<Self> {
        domain.validate()?;
        if origin.len() != shape.len() || spacing.len() != shape.len() {
            return Err(DbarError::InvalidInput("inconsistent axis counts".into()));
        }
        if spacing.iter().any(|&h| !(h > 0.0)) || shape.iter().any(|&n| n < 2) {
            return Err(DbarError::InvalidInput(
                "spacing must be positive and shape >= 2".into(),
            ));
        }
        let mut grid = ComplexGrid {
            domain,
            origin,
            spacing,
            shape,
            mask: Vec::new(),
            weights: Vec::new(),
        };
        grid.recompute_weights();
        if let Some(m) = mask {
            if m.len() != grid.len() {
                return Err(DbarError::Format("mask length mismatch".into()));
            }
            grid = grid.with_mask(&m);
        }
        Ok(grid)
    }

    fn recompute_weights(&mut self) {
        let n = self.shape.iter().product();
        let weights: Vec<f64> = (0..n)
            .map(|i| {
                let p = self.point(i);
                self.domain.cell_fraction(&p[..self.nvars()], &self.spacing)
            })
            .collect();
        self.mask = weights.iter().map(|&w| w > 1e-12).collect();
        self.weights = weights
            .into_iter()
            .map(|w| if w > 1e-12 { w } else { 0.0 })
            .collect();
    }

    /// Same lattice with the mask intersected with `region`.
    pub fn with_mask(&self, region: &[bool]) -> Self {
        let mut g = self.clone();
        for i in 0..g.len() {
            if !region[i] {
                g.mask[i] = false;
                g.weights[i] = 0.0;
            }
        }
        g
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn origin(&self) -> &[f64] {
        &self.origin
    }
    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.mask.len()
    }
    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }
    pub fn axes(&self) -> usize {
        self.shape.len()
    }
    pub fn nvars(&self) -> usize {
        self.shape.len() / 2
    }
    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Largest spacing over the axes.
    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().cloned().fold(0.0, f64::max)
    }

    /// Spacing of the lattice in variable `var` (max over its two axes).
    pub fn var_spacing(&self, var: usize) -> f64 {
        self.spacing[2 * var].max(self.spacing[2 * var + 1])
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Quadrature weight (volume times domain fraction) of cell `i`.
    pub fn quad_weight(&self, i: usize) -> f64 {
        self.weights[i] * self.cell_volume()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.axes()];
        for a in (0..self.axes().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.shape[a + 1];
        }
        s
    }

    pub fn unravel(&self, mut i: usize) -> [usize; 4] {
        let mut out = [0; 4];
        for a in (0..self.axes()).rev() {
            out[a] = i % self.shape[a];
            i /= self.shape[a];
        }
        out
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Complex coordinates of the centre of cell `i` (unused slot is zero).
    pub fn point(&self, i: usize) -> [C64; 2] {
        let idx = self.unravel(i);
        let coord = |a: usize| self.origin[a] + idx[a] as f64 * self.spacing[a];
        let z1 = C64::new(coord(0), coord(1));
        let z2 = if self.axes() == 4 {
            C64::new(coord(2), coord(3))
        } else {
            C64::new(0.0, 0.0)
        };
        [z1, z2]
    }

    /// Centre of cell `i` for a one-variable grid.
    pub fn z(&self, i: usize) -> C64 {
        self.point(i)[0]
    }

    /// Whether the centre of cell `i` lies in the closed domain.
    pub fn center_inside(&self, i: usize) -> bool {
        let p = self.point(i);
        self.domain.contains(&p[..self.nvars()])
    }

    /// Fractional lattice coordinate of a point along axis `a`.
    pub fn lattice_coord(&self, a: usize, x: f64) -> f64 {
        (x - self.origin[a]) / self.spacing[a]
    }

    /// Whether `other` uses the same spacing and a lattice offset by whole
    /// cells; returns the integer offset per axis (`other` index `i`
    /// corresponds to `self` index `i + offset`).
    pub fn lattice_offset(&self, other: &ComplexGrid) -> Option<Vec<i64>> {
        if self.axes() != other.axes() {
            return None;
        }
        let mut off = Vec::with_capacity(self.axes());
        for a in 0..self.axes() {
            let h = self.spacing[a];
            if ((other.spacing[a] - h) / h).abs() > 1e-9 {
                return None;
            }
            let k = (other.origin[a] - self.origin[a]) / h;
            if (k - k.round()).abs() > 1e-6 {
                return None;
            }
            off.push(k.round() as i64);
        }
        Some(off)
    }

    /// Index of the lattice node nearest to `point` in the plane of
    /// variable `var`, or `None` when the point is more than half a cell
    /// outside the lattice.
    pub fn nearest_node(&self, var: usize, point: C64) -> Option<(usize, usize)> {
        let snap = |a: usize, x: f64| {
            let k = self.lattice_coord(a, x);
            let n = self.shape[a] as f64;
            if k < -0.5 || k > n - 0.5 {
                None
            } else {
                Some(k.round().clamp(0.0, n - 1.0) as usize)
            }
        };
        Some((snap(2 * var, point.re)?, snap(2 * var + 1, point.im)?))
    }

    /// One-variable grid of coordinate `var` of a two-variable grid, built
    /// from the corresponding factor of the domain.
    pub fn factor_grid(&self, var: usize) -> ComplexGrid {
        let ax = 2 * var..2 * var + 2;
        ComplexGrid::from_parts(
            self.domain.factor(var),
            self.origin[ax.clone()].to_vec(),
            self.spacing[ax.clone()].to_vec(),
            self.shape[ax].to_vec(),
            None,
        )
        .expect("factor of a valid grid is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_disc_mask_fraction() {
        let g = ComplexGrid::build(Domain::unit_disc(), 128).unwrap();
        let inside = (0..g.len()).filter(|&i| g.center_inside(i)).count() as f64;
        let expected = PI / 4.0 * 128.0 * 128.0;
        assert!((inside / expected - 1.0).abs() < 0.02);
        let area: f64 = (0..g.len()).map(|i| g.quad_weight(i)).sum();
        assert!((area - PI).abs() < 1e-12);
    }

    #[test]
    fn rect_masks_every_cell() {
        let g = ComplexGrid::build(
            Domain::rect(C64::new(-1.0, -1.0), C64::new(1.0, 1.0)),
            64,
        )
        .unwrap();
        assert_eq!(g.masked_count(), 64 * 64);
        assert!((g.spacing()[0] - 2.0 / 63.0).abs() < 1e-15);
    }

    #[test]
    fn polydisc_is_four_dimensional() {
        let g = ComplexGrid::build(Domain::polydisc([1.0, 1.0]), 32).unwrap();
        assert_eq!(g.len(), 32usize.pow(4));
        assert_eq!(g.axes(), 4);
        let vol: f64 = (0..g.len()).map(|i| g.quad_weight(i)).sum();
        assert!((vol - PI * PI).abs() < 1e-10);
    }

    #[test]
    fn invalid_domains_are_rejected() {
        assert!(matches!(
            ComplexGrid::build(Domain::disc(C64::new(0.0, 0.0), -1.0), 16),
            Err(DbarError::InvalidDomain(_))
        ));
        assert!(matches!(
            ComplexGrid::build(Domain::rect(C64::new(1.0, 0.0), C64::new(0.0, 1.0)), 16),
            Err(DbarError::InvalidDomain(_))
        ));
        assert!(matches!(
            ComplexGrid::build(Domain::unit_disc(), 4),
            Err(DbarError::Resolution(_))
        ));
    }

    #[test]
    fn ravel_unravel_roundtrip() {
        let g = ComplexGrid::build_with_shape(Domain::polydisc([1.0, 0.5]), &[9, 10, 11, 12]).unwrap();
        for i in [0, 17, 999, g.len() - 1] {
            let idx = g.unravel(i);
            assert_eq!(g.ravel(&idx[..4]), i);
        }
    }
}
