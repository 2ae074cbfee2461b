use serde::Serialize;

use super::winding::{winding_around, winding_number, Contour};
use crate::error::{DbarError, Result};
use crate::grid::interp::{interpolate, Order};
use crate::grid::Field;
use crate::C64;

/// Off-centre split fractions tried in turn, so that subdivision edges
/// avoid roots lying on symmetry lines.
const SPLITS: [f64; 4] = [0.5137, 0.4787, 0.5311, 0.4619];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root {
    pub z: C64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceCount {
    /// Total multiplicity inside the contour.
    pub n: usize,
    pub roots: Vec<Root>,
    /// Radius of the counting circle actually used.
    pub radius: f64,
}

impl SliceCount {
    /// Roots repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<C64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat(r.z).take(r.multiplicity))
            .collect()
    }
}

/// Count and locate the zeros of a one-variable field in the disc
/// `|z| < eps0` by the argument principle and recursive quadrisection.
pub fn count_zeros_slice(f: &Field, eps0: f64) -> Result<SliceCount> {
    let h = f.grid().max_spacing();
    let origin = C64::new(0.0, 0.0);
    let mut last_err = None;
    let mut found = None;
    for r in [eps0, eps0 + h, eps0 - h] {
        match winding_number(f, origin, r) {
            Ok(w) => {
                found = Some((w, r));
                break;
            }
            Err(e @ (DbarError::ContourThroughZero { .. } | DbarError::AmbiguousWinding { .. })) => {
                last_err = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    let (w, radius) = match found {
        Some(v) => v,
        None => return Err(last_err.expect("at least one attempt")),
    };
    if w < 0 {
        return Err(DbarError::InvalidInput(format!(
            "negative winding number {w}; the field is not holomorphic-like"
        )));
    }
    let n = w as usize;
    if n == 0 {
        return Ok(SliceCount {
            n,
            roots: Vec::new(),
            radius,
        });
    }

    let mut leaves = Vec::new();
    let mut ok = false;
    for pad in [1.013, 1.029, 1.047] {
        let side = 2.0 * radius * pad;
        let sq = Contour::Square {
            lo: C64::new(-0.5 * side, -0.5 * side),
            side,
        };
        leaves.clear();
        let lo = C64::new(-0.5 * side, -0.5 * side);
        if let Ok(count) = winding_around(f, sq) {
            if count >= n as i64
                && rect_subdivide(f, lo, side, side, count, 2.0 * h, &mut leaves).is_ok()
            {
                ok = true;
                break;
            }
        }
    }
    if !ok {
        return Err(DbarError::Resolution(format!(
            "could not isolate the {n} zeros inside radius {radius}"
        )));
    }

    let mut roots: Vec<Root> = leaves
        .into_iter()
        .map(|(lo, wx, wy, m)| Root {
            z: refine(f, lo + C64::new(0.5 * wx, 0.5 * wy), wx.max(wy), m as usize),
            multiplicity: m as usize,
        })
        .filter(|r| r.z.norm() < radius)
        .collect();
    roots.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    let total: usize = roots.iter().map(|r| r.multiplicity).sum();
    if total != n {
        return Err(DbarError::Resolution(format!(
            "isolated multiplicity {total} differs from winding count {n}"
        )));
    }
    Ok(SliceCount { n, roots, radius })
}

fn rect_subdivide(
    f: &Field,
    lo: C64,
    wx: f64,
    wy: f64,
    count: i64,
    min_side: f64,
    leaves: &mut Vec<(C64, f64, f64, i64)>,
) -> Result<()> {
    if count <= 0 {
        return Ok(());
    }
    if wx.max(wy) <= min_side {
        leaves.push((lo, wx, wy, count));
        return Ok(());
    }
    for s in SPLITS {
        let (ax, ay) = (s * wx, s * wy);
        let kids = [
            (lo, ax, ay),
            (lo + C64::new(ax, 0.0), wx - ax, ay),
            (lo + C64::new(0.0, ay), ax, wy - ay),
            (lo + C64::new(ax, ay), wx - ax, wy - ay),
        ];
        let counts: Result<Vec<i64>> = kids
            .iter()
            .map(|&(klo, a, b)| winding_around(f, Contour::Rect { lo: klo, size: C64::new(a, b) }))
            .collect();
        let Ok(counts) = counts else { continue };
        if counts.iter().sum::<i64>() != count || counts.iter().any(|&c| c < 0) {
            continue;
        }
        for (&(klo, a, b), &c) in kids.iter().zip(&counts) {
            rect_subdivide(f, klo, a, b, c, min_side, leaves)?;
        }
        return Ok(());
    }
    Err(DbarError::Resolution("quadrisection failed to split a cell".into()))
}

/// Newton refinement of a root isolated in a leaf: a real 2x2 Newton step
/// for simple roots, multiplicity-weighted complex steps otherwise.
fn refine(f: &Field, centre: C64, side: f64, m: usize) -> C64 {
    let h = f.grid().max_spacing();
    let eta = 1e-4 * h;
    let eval = |z: C64| interpolate(f, z, Order::Quintic);
    let mut z = centre;
    for _ in 0..40 {
        let (Some(v), Some(px), Some(mx), Some(py), Some(my)) = (
            eval(z),
            eval(z + eta),
            eval(z - eta),
            eval(z + C64::new(0.0, eta)),
            eval(z - C64::new(0.0, eta)),
        ) else {
            return centre;
        };
        let fx = (px - mx) / (2.0 * eta);
        let fy = (py - my) / (2.0 * eta);
        let step = if m == 1 {
            let det = fx.re * fy.im - fy.re * fx.im;
            if det.abs() < 1e-300 {
                return centre;
            }
            let dx = -(fy.im * v.re - fy.re * v.im) / det;
            let dy = -(-fx.im * v.re + fx.re * v.im) / det;
            C64::new(dx, dy)
        } else {
            let fz = 0.5 * (fx - C64::new(0.0, 1.0) * fy);
            if fz.norm() < 1e-300 {
                break;
            }
            -(m as f64) * v / fz
        };
        z += step;
        if (z - centre).norm() > 2.0 * side {
            return centre;
        }
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}
