//! Removable-singularity checks: subharmonic regularization across polar
//! sets, Poisson extension, Riesz decomposition, the Chirka potential and
//! the J-holomorphy pipeline.

mod chirka;
mod jhol;
mod pipeline;
mod poisson;
mod polar;
mod rado;
mod riesz;

pub use chirka::{disc_family, ChirkaPotential, ChirkaReport, TestDisc, LEVI_TOLERANCE};
pub use jhol::{jhol_residual, AlmostComplexStructure, JholReport, QModel};
pub use pipeline::{theorem_b_pipeline, BeltramiStep, RemovabilityReport, Verdict};
pub use poisson::{poisson_extend, PoissonExtension, MIN_NODES};
pub use polar::{CantorSpec, PolarSetSpec};
pub use rado::{rado_subharmonic, RadoReport, EPS_LEVELS};
pub use riesz::{riesz_decompose, RieszDecomposition};

use crate::grid::ComplexGrid;

/// Five-point Laplacian of real values on a one-variable grid. `None` where
/// a neighbour is missing from the mask.
pub(crate) fn laplacian(grid: &ComplexGrid, v: &[f64]) -> Vec<Option<f64>> {
    let (hx, hy) = (grid.spacing()[0], grid.spacing()[1]);
    (0..grid.len())
        .map(|i| {
            let nb = axis_neighbours(grid, i)?;
            if !grid.mask()[i] || nb.iter().any(|&j| !grid.mask()[j]) {
                return None;
            }
            let lx = (v[nb[0]] + v[nb[1]] - 2.0 * v[i]) / (hx * hx);
            let ly = (v[nb[2]] + v[nb[3]] - 2.0 * v[i]) / (hy * hy);
            Some(lx + ly)
        })
        .collect()
}

/// The four axis neighbours of an interior cell.
pub(crate) fn axis_neighbours(grid: &ComplexGrid, i: usize) -> Option<[usize; 4]> {
    let idx = grid.unravel(i);
    let (nx, ny) = (grid.shape()[0], grid.shape()[1]);
    if idx[0] == 0 || idx[1] == 0 || idx[0] + 1 >= nx || idx[1] + 1 >= ny {
        return None;
    }
    let st = grid.strides();
    Some([i - st[0], i + st[0], i - st[1], i + st[1]])
}
