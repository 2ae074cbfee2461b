use std::sync::Arc;

use rayon::prelude::*;

use super::ComplexGrid;
use crate::error::{DbarError, Result};
use crate::C64;

/// Values of a scalar, vector or matrix valued function at every cell of a
/// grid. Each cell holds `rows * cols` entries in row-major order.
///
/// Generators evaluate on the whole lattice; cells outside the mask carry
/// whatever was written there and are ignored by every integral.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<ComplexGrid>,
    rows: usize,
    cols: usize,
    values: Vec<C64>,
}

impl Field {
    pub fn new(grid: Arc<ComplexGrid>, rows: usize, cols: usize, values: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != grid.len() * rows * cols {
            return Err(DbarError::InvalidInput(format!(
                "expected {} values of shape {rows}x{cols}, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Field {
            grid,
            rows,
            cols,
            values,
        })
    }

    pub fn scalar(grid: Arc<ComplexGrid>, values: Vec<C64>) -> Result<Self> {
        Field::new(grid, 1, 1, values)
    }

    pub fn zeros(grid: Arc<ComplexGrid>, rows: usize, cols: usize) -> Self {
        let n = grid.len() * rows * cols;
        Field {
            grid,
            rows,
            cols,
            values: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn constant(grid: Arc<ComplexGrid>, c: C64) -> Self {
        let n = grid.len();
        Field {
            grid,
            rows: 1,
            cols: 1,
            values: vec![c; n],
        }
    }

    /// Scalar field sampled at cell centres; the closure receives
    /// `[z1, z2]` (the second slot is zero on one-variable grids).
    pub fn from_fn<F>(grid: Arc<ComplexGrid>, f: F) -> Self
    where
        F: Fn([C64; 2]) -> C64 + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.point(i)))
            .collect();
        Field {
            grid,
            rows: 1,
            cols: 1,
            values,
        }
    }

    /// Matrix field; `f` fills one cell's `rows * cols` entries.
    pub fn from_fn_matrix<F>(grid: Arc<ComplexGrid>, rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn([C64; 2], &mut [C64]) + Sync,
    {
        let mut values = vec![C64::new(0.0, 0.0); grid.len() * rows * cols];
        values
            .par_chunks_mut(rows * cols)
            .enumerate()
            .for_each(|(i, cell)| f(grid.point(i), cell));
        Field {
            grid,
            rows,
            cols,
            values,
        }
    }

    /// Cell average of the indicator of the disc `|z - center| < radius`.
    pub fn disc_indicator(grid: Arc<ComplexGrid>, center: C64, radius: f64) -> Self {
        let (hx, hy) = (grid.spacing()[0], grid.spacing()[1]);
        Field::from_fn(grid, |p| {
            let z = p[0];
            let a = crate::numeric::disc_rect_area(
                center,
                radius,
                z.re - 0.5 * hx,
                z.re + 0.5 * hx,
                z.im - 0.5 * hy,
                z.im + 0.5 * hy,
            );
            C64::new(a / (hx * hy), 0.0)
        })
    }

    pub fn grid(&self) -> &ComplexGrid {
        &self.grid
    }
    pub fn grid_arc(&self) -> &Arc<ComplexGrid> {
        &self.grid
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn cell_len(&self) -> usize {
        self.rows * self.cols
    }
    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn cell(&self, i: usize) -> &[C64] {
        let k = self.cell_len();
        &self.values[i * k..(i + 1) * k]
    }

    /// Scalar value at cell `i` (first entry for matrix fields).
    pub fn at(&self, i: usize) -> C64 {
        self.values[i * self.cell_len()]
    }

    /// Frobenius modulus of the value at cell `i`.
    pub fn cell_modulus(&self, i: usize) -> f64 {
        self.cell(i).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest cell modulus over masked cells.
    pub fn max_modulus(&self) -> f64 {
        (0..self.grid.len())
            .filter(|&i| self.grid.mask()[i])
            .map(|i| self.cell_modulus(i))
            .fold(0.0, f64::max)
    }

    /// Entry `(r, c)` as a scalar field.
    pub fn component(&self, r: usize, c: usize) -> Field {
        let k = self.cell_len();
        let off = r * self.cols + c;
        let values = (0..self.grid.len()).map(|i| self.values[i * k + off]).collect();
        Field {
            grid: self.grid.clone(),
            rows: 1,
            cols: 1,
            values,
        }
    }

    /// Assemble a matrix field from scalar entries listed row-major.
    pub fn from_components(rows: usize, cols: usize, parts: &[Field]) -> Result<Field> {
        if parts.len() != rows * cols || parts.is_empty() {
            return Err(DbarError::InvalidInput("component count mismatch".into()));
        }
        let grid = parts[0].grid.clone();
        if parts.iter().any(|p| !p.is_scalar() || *p.grid != *grid) {
            return Err(DbarError::InvalidInput(
                "components must be scalar fields on one grid".into(),
            ));
        }
        let k = rows * cols;
        let mut values = vec![C64::new(0.0, 0.0); grid.len() * k];
        for (off, p) in parts.iter().enumerate() {
            for i in 0..grid.len() {
                values[i * k + off] = p.values[i];
            }
        }
        Field::new(grid, rows, cols, values)
    }

    /// Apply `f` entrywise.
    pub fn map<F: Fn(C64) -> C64 + Sync>(&self, f: F) -> Field {
        Field {
            grid: self.grid.clone(),
            rows: self.rows,
            cols: self.cols,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    /// Apply `f` entrywise to two fields of identical layout.
    pub fn zip_map<F: Fn(C64, C64) -> C64 + Sync>(&self, other: &Field, f: F) -> Result<Field> {
        self.check_same_layout(other)?;
        Ok(Field {
            grid: self.grid.clone(),
            rows: self.rows,
            cols: self.cols,
            values: self
                .values
                .par_iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: C64) -> Field {
        self.map(|v| v * s)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_map(other, |a, b| a - b)
    }

    /// Same values with every unmasked cell set to zero.
    pub fn masked(&self) -> Field {
        let k = self.cell_len();
        let mut out = self.clone();
        for i in 0..self.grid.len() {
            if !self.grid.mask()[i] {
                out.values[i * k..(i + 1) * k].fill(C64::new(0.0, 0.0));
            }
        }
        out
    }

    /// Same values attached to another grid with the same lattice.
    pub fn with_grid(&self, grid: Arc<ComplexGrid>) -> Result<Field> {
        if grid.shape() != self.grid.shape() {
            return Err(DbarError::InvalidInput("grid shape mismatch".into()));
        }
        Field::new(grid, self.rows, self.cols, self.values.clone())
    }

    pub(crate) fn check_same_layout(&self, other: &Field) -> Result<()> {
        if self.rows != other.rows
            || self.cols != other.cols
            || self.grid.shape() != other.grid.shape()
        {
            return Err(DbarError::InvalidInput(
                "fields have different layouts".into(),
            ));
        }
        Ok(())
    }
}

/// Coefficients of a (0,1)-form: one field per `dz̄_j`.
#[derive(Clone, Debug)]
pub struct OneForm {
    components: Vec<Field>,
}

impl OneForm {
    pub fn new(components: Vec<Field>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(DbarError::InvalidInput("one-form needs a component".into()));
        };
        if components.len() != first.grid().nvars() {
            return Err(DbarError::InvalidInput(format!(
                "{} components for a grid in {} variables",
                components.len(),
                first.grid().nvars()
            )));
        }
        for c in &components[1..] {
            if c.grid() != first.grid() || c.rows() != first.rows() || c.cols() != first.cols() {
                return Err(DbarError::InvalidInput(
                    "one-form components must share a grid and value shape".into(),
                ));
            }
        }
        Ok(OneForm { components })
    }

    /// `coefficient · dz̄` on a one-variable grid.
    pub fn single(coefficient: Field) -> Result<Self> {
        OneForm::new(vec![coefficient])
    }

    pub fn zeros(grid: Arc<ComplexGrid>, rows: usize, cols: usize) -> Self {
        let n = grid.nvars();
        OneForm {
            components: (0..n).map(|_| Field::zeros(grid.clone(), rows, cols)).collect(),
        }
    }

    pub fn components(&self) -> &[Field] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &Field {
        &self.components[j]
    }

    pub fn into_components(self) -> Vec<Field> {
        self.components
    }

    pub fn grid(&self) -> &ComplexGrid {
        self.components[0].grid()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;

    #[test]
    fn components_roundtrip() {
        let g = Arc::new(ComplexGrid::build(Domain::unit_disc(), 16).unwrap());
        let m = Field::from_fn_matrix(g.clone(), 2, 2, |p, out| {
            for (k, o) in out.iter_mut().enumerate() {
                *o = p[0] * k as f64;
            }
        });
        let parts: Vec<Field> = (0..4).map(|k| m.component(k / 2, k % 2)).collect();
        let back = Field::from_components(2, 2, &parts).unwrap();
        assert_eq!(back.values(), m.values());
    }

    #[test]
    fn one_form_checks_component_count() {
        let g = Arc::new(ComplexGrid::build(Domain::unit_disc(), 16).unwrap());
        let f = Field::constant(g, C64::new(1.0, 0.0));
        assert!(OneForm::new(vec![f.clone(), f]).is_err());
    }
}
