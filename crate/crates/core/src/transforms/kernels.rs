//! Exact cell integrals of the planar kernels and their lattice convolution.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{DbarError, Result};
use crate::grid::{ComplexGrid, Field};
use crate::C64;

/// Kernels convolved against area measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// `1/(π w)`.
    Cauchy,
    /// `-1/(π w²)`, principal value on the self cell.
    Beurling,
    /// `log|w| / 2π`.
    Newton,
}

fn atan_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        (num / den).atan()
    }
}

fn xlogr2(x: f64, r2: f64) -> f64 {
    if x == 0.0 || r2 == 0.0 {
        0.0
    } else {
        x * r2.ln()
    }
}

/// Mixed antiderivative of `1/w` (real and imaginary parts).
fn cauchy_prim(x: f64, y: f64) -> C64 {
    let r2 = x * x + y * y;
    let re = 0.5 * xlogr2(y, r2) + x * atan_ratio(y, x);
    let im = 0.5 * xlogr2(x, r2) + y * atan_ratio(x, y);
    C64::new(re, -im)
}

/// Mixed antiderivative of `1/w²`; `straddle_x` selects the branch that is
/// smooth across `x = 0`.
fn beurling_prim(x: f64, y: f64, straddle_x: bool) -> C64 {
    let r2 = x * x + y * y;
    let re = if straddle_x {
        atan_ratio(x, y)
    } else {
        -atan_ratio(y, x)
    };
    let im = if r2 == 0.0 { 0.0 } else { 0.5 * r2.ln() };
    C64::new(re, im)
}

/// Mixed antiderivative of `ln(x² + y²)`.
fn log_prim(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let xy = x * y;
    let l = if xy == 0.0 { 0.0 } else { xy * r2.ln() };
    l - 3.0 * xy + x * x * atan_ratio(y, x) + y * y * atan_ratio(x, y)
}

/// `∫ k(w) dA(w)` over the rectangle centred at `d` with sides `hx`, `hy`.
pub fn cell_integral(kernel: Kernel, d: C64, hx: f64, hy: f64) -> C64 {
    let (x0, x1) = (d.re - 0.5 * hx, d.re + 0.5 * hx);
    let (y0, y1) = (d.im - 0.5 * hy, d.im + 0.5 * hy);
    let contains_origin = x0 < 0.0 && x1 > 0.0 && y0 < 0.0 && y1 > 0.0;
    match kernel {
        Kernel::Cauchy => {
            let v = cauchy_prim(x1, y1) - cauchy_prim(x0, y1) - cauchy_prim(x1, y0)
                + cauchy_prim(x0, y0);
            v / PI
        }
        Kernel::Beurling => {
            if contains_origin {
                return C64::new(0.0, 0.0);
            }
            let s = x0 < 0.0 && x1 > 0.0;
            let v = beurling_prim(x1, y1, s) - beurling_prim(x0, y1, s)
                - beurling_prim(x1, y0, s)
                + beurling_prim(x0, y0, s);
            // ∂x∂y (i log w) = 1/w²
            -v / PI
        }
        Kernel::Newton => {
            let v = log_prim(x1, y1) - log_prim(x0, y1) - log_prim(x1, y0) + log_prim(x0, y0);
            C64::new(v / (4.0 * PI), 0.0)
        }
    }
}

fn fft2(data: &mut [C64], nx: usize, ny: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let (fy, fx) = if inverse {
        (planner.plan_fft_inverse(ny), planner.plan_fft_inverse(nx))
    } else {
        (planner.plan_fft_forward(ny), planner.plan_fft_forward(nx))
    };
    data.par_chunks_mut(ny).for_each(|row| fy.process(row));
    let mut t = vec![C64::new(0.0, 0.0); nx * ny];
    t.par_chunks_mut(nx).enumerate().for_each(|(j, col)| {
        for i in 0..nx {
            col[i] = data[i * ny + j];
        }
        fx.process(col);
    });
    data.par_chunks_mut(ny).enumerate().for_each(|(i, row)| {
        for j in 0..ny {
            row[j] = t[j * nx + i];
        }
    });
}

/// Lattice convolution of quadrature-weighted samples with a kernel:
/// `out[t] = Σ_s K(z_t - ξ_s) w_s f_s`, where `K` is the exact cell integral.
/// `target` must share the source lattice up to a whole-cell offset. One
/// output vector per value entry of `f`.
pub fn convolve(kernel: Kernel, f: &Field, target: &ComplexGrid) -> Result<Vec<Vec<C64>>> {
    let src = f.grid();
    if src.nvars() != 1 {
        return Err(DbarError::InvalidInput(
            "kernel convolution acts on one-variable grids".into(),
        ));
    }
    if src.masked_count() == 0 {
        return Err(DbarError::InvalidInput("source mask is empty".into()));
    }
    let off = src.lattice_offset(target).ok_or_else(|| {
        DbarError::InvalidInput("target grid is not aligned with the source lattice".into())
    })?;
    let (hx, hy) = (src.spacing()[0], src.spacing()[1]);
    let (nx, ny) = (src.shape()[0], src.shape()[1]);
    let (mx, my) = (target.shape()[0], target.shape()[1]);
    let (lx, ly) = (mx + nx - 1, my + ny - 1);
    let (dx0, dy0) = (off[0] - (nx as i64 - 1), off[1] - (ny as i64 - 1));
    let (px, py) = ((nx + lx - 1).next_power_of_two(), (ny + ly - 1).next_power_of_two());

    let mut kern = vec![C64::new(0.0, 0.0); px * py];
    kern.par_chunks_mut(py).enumerate().take(lx).for_each(|(a, row)| {
        let dx = (dx0 + a as i64) as f64 * hx;
        for (b, v) in row.iter_mut().enumerate().take(ly) {
            let dy = (dy0 + b as i64) as f64 * hy;
            *v = cell_integral(kernel, C64::new(dx, dy), hx, hy);
        }
    });
    fft2(&mut kern, px, py, false);

    let scale = 1.0 / (px * py) as f64;
    let k = f.cell_len();
    let mut outputs = Vec::with_capacity(k);
    for e in 0..k {
        let mut buf = vec![C64::new(0.0, 0.0); px * py];
        for i in 0..src.len() {
            if src.mask()[i] {
                let idx = src.unravel(i);
                buf[idx[0] * py + idx[1]] = f.values()[i * k + e] * src.weights()[i];
            }
        }
        fft2(&mut buf, px, py, false);
        buf.par_iter_mut().zip(&kern).for_each(|(b, kk)| *b *= kk);
        fft2(&mut buf, px, py, true);
        let mut out = vec![C64::new(0.0, 0.0); target.len()];
        for (t, o) in out.iter_mut().enumerate() {
            let idx = target.unravel(t);
            let n = (idx[0] + nx - 1) * py + idx[1] + ny - 1;
            *o = buf[n] * scale;
        }
        outputs.push(out);
    }
    Ok(outputs)
}
