use std::sync::Arc;

use super::{ComplexGrid, Field};
use crate::error::{DbarError, Result};
use crate::C64;

/// Which coordinate a slice holds fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineAxis {
    /// Fix `z1`; the slice is a function of `z2`.
    FixFirst,
    /// Fix `z2`; the slice is a function of `z1`.
    FixSecond,
}

impl LineAxis {
    /// `1` fixes `z1`, `2` fixes `z2`.
    pub fn from_index(axis: usize) -> Result<Self> {
        match axis {
            1 => Ok(LineAxis::FixFirst),
            2 => Ok(LineAxis::FixSecond),
            _ => Err(DbarError::InvalidInput(format!("axis {axis} is not 1 or 2"))),
        }
    }

    pub fn fixed_var(self) -> usize {
        match self {
            LineAxis::FixFirst => 0,
            LineAxis::FixSecond => 1,
        }
    }

    pub fn free_var(self) -> usize {
        1 - self.fixed_var()
    }
}

/// Restriction of a field on a C^2 grid to the complex line where the
/// coordinate selected by `axis` equals `coordinate` (snapped to the nearest
/// lattice line).
pub fn slice(f: &Field, axis: LineAxis, coordinate: C64) -> Result<Field> {
    let grid = f.grid();
    if grid.nvars() != 2 {
        return Err(DbarError::InvalidInput("slice needs a two-variable grid".into()));
    }
    let fixed = axis.fixed_var();
    let (a, b) = grid.nearest_node(fixed, coordinate).ok_or_else(|| {
        DbarError::OutOfDomain(format!("coordinate {coordinate} outside the grid extent"))
    })?;
    let line = Arc::new(grid.factor_grid(axis.free_var()));
    let k = f.cell_len();
    let mut values = Vec::with_capacity(line.len() * k);
    for j in 0..line.len() {
        let jj = line.unravel(j);
        let idx = if fixed == 0 {
            [a, b, jj[0], jj[1]]
        } else {
            [jj[0], jj[1], a, b]
        };
        values.extend_from_slice(f.cell(grid.ravel(&idx)));
    }
    Field::new(line, f.rows(), f.cols(), values)
}

/// Extend a one-variable field to `grid` as a function of variable
/// `free_var` only. The factor lattice of `grid` must match `g`'s.
pub fn embed(g: &Field, grid: Arc<ComplexGrid>, free_var: usize) -> Result<Field> {
    if grid.nvars() != 2 || g.grid().nvars() != 1 {
        return Err(DbarError::InvalidInput("embed maps C fields into C^2 grids".into()));
    }
    let ax = 2 * free_var;
    if g.grid().shape() != &grid.shape()[ax..ax + 2] {
        return Err(DbarError::InvalidInput("factor lattice mismatch".into()));
    }
    let k = g.cell_len();
    let mut values = Vec::with_capacity(grid.len() * k);
    for i in 0..grid.len() {
        let idx = grid.unravel(i);
        values.extend_from_slice(g.cell(g.grid().ravel(&idx[ax..ax + 2])));
    }
    Field::new(grid, g.rows(), g.cols(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;

    fn bidisc() -> Arc<ComplexGrid> {
        Arc::new(ComplexGrid::build(Domain::polydisc([1.0, 1.0]), 21).unwrap())
    }

    #[test]
    fn slice_of_sum() {
        let g = bidisc();
        let f = Field::from_fn(g, |p| p[0] + p[1]);
        let s = slice(&f, LineAxis::FixFirst, C64::new(0.3, 0.0)).unwrap();
        for j in 0..s.grid().len() {
            assert!((s.at(j) - (C64::new(0.3, 0.0) + s.grid().z(j))).norm() < 1e-12);
        }
        let q = Field::from_fn(s.grid_arc().clone(), |p| p[0]);
        assert_eq!(q.grid().len(), s.grid().len());
    }

    #[test]
    fn out_of_extent_is_rejected() {
        let f = Field::constant(bidisc(), C64::new(1.0, 0.0));
        assert!(matches!(
            slice(&f, LineAxis::FixSecond, C64::new(3.0, 0.0)),
            Err(DbarError::OutOfDomain(_))
        ));
    }

    #[test]
    fn slice_inverts_embed() {
        let g = bidisc();
        let line = Arc::new(g.factor_grid(1));
        let h = Field::from_fn(line, |p| p[0] * p[0] - 0.1);
        let e = embed(&h, g, 1).unwrap();
        let back = slice(&e, LineAxis::FixFirst, C64::new(-0.4, 0.2)).unwrap();
        assert_eq!(back.values(), h.values());
    }
}
