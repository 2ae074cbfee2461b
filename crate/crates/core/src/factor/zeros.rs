use serde::Serialize;

use super::scalar::ZERO_FLOOR;
use crate::grid::Field;
use crate::zeroset::{winding_around, Contour};
use crate::C64;

/// Confirmation circles around a candidate, in lattice spacings.
const CONFIRM_RADII: [f64; 3] = [1.5, 1.2, 1.8];
/// Consecutive nonempty dyadic annuli that make a cluster.
const CLUSTER_ANNULI: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct ZeroReport {
    pub zeros: Vec<C64>,
    pub multiplicities: Vec<u32>,
    pub isolated: bool,
    pub identically_zero: bool,
    pub accumulation: bool,
    /// Zeros around which the accumulation test fired.
    pub cluster_points: Vec<C64>,
}

/// Locate the zeros of the holomorphic candidate `F` (scalar, one
/// variable): cells where `f` or `F` vanishes numerically, and local
/// minima of `|F|` confirmed by a positive winding number.
pub fn check_isolated_zeros(f: &Field, big_f: &Field) -> ZeroReport {
    let grid = big_f.grid();
    let h = grid.max_spacing();
    let f_floor = ZERO_FLOOR * f.max_modulus();
    let big_floor = ZERO_FLOOR * big_f.max_modulus();
    if f.max_modulus() == 0.0 || big_f.max_modulus() == 0.0 {
        return ZeroReport {
            zeros: Vec::new(),
            multiplicities: Vec::new(),
            isolated: true,
            identically_zero: true,
            accumulation: false,
            cluster_points: Vec::new(),
        };
    }
    let (nx, ny) = (grid.shape()[0], grid.shape()[1]);
    let mut zeros = Vec::new();
    let mut multiplicities = Vec::new();
    for a in 0..nx {
        for b in 0..ny {
            let i = grid.ravel(&[a, b]);
            if !grid.mask()[i] || !grid.center_inside(i) {
                continue;
            }
            let z = grid.z(i);
            let v = big_f.at(i).norm();
            if f.at(i).norm() <= f_floor || v <= big_floor {
                zeros.push(z);
                multiplicities.push(confirm(big_f, z, h).filter(|&w| w >= 1).unwrap_or(1));
                continue;
            }
            if is_local_minimum(big_f, a, b, v) {
                if let Some(w) = confirm(big_f, z, h).filter(|&w| w >= 1) {
                    zeros.push(z);
                    multiplicities.push(w);
                }
            }
        }
    }
    let isolated = zeros
        .iter()
        .enumerate()
        .all(|(j, z)| zeros[j + 1..].iter().all(|w| (w - z).norm() > 2.0 * h));
    let cluster_points: Vec<C64> = zeros
        .iter()
        .copied()
        .filter(|&z| accumulates_at(&zeros, z, h))
        .collect();
    ZeroReport {
        accumulation: !cluster_points.is_empty(),
        zeros,
        multiplicities,
        isolated,
        identically_zero: false,
        cluster_points,
    }
}

fn is_local_minimum(f: &Field, a: usize, b: usize, v: f64) -> bool {
    let g = f.grid();
    let i = g.ravel(&[a, b]);
    let (nx, ny) = (g.shape()[0] as i64, g.shape()[1] as i64);
    for da in -1i64..=1 {
        for db in -1i64..=1 {
            if da == 0 && db == 0 {
                continue;
            }
            let (x, y) = (a as i64 + da, b as i64 + db);
            if x < 0 || y < 0 || x >= nx || y >= ny {
                return false;
            }
            let j = g.ravel(&[x as usize, y as usize]);
            let w = f.at(j).norm();
            // ties go to the lower index
            if !g.mask()[j] || w < v || (w == v && j < i) {
                return false;
            }
        }
    }
    true
}

fn confirm(f: &Field, z: C64, h: f64) -> Option<u32> {
    CONFIRM_RADII.iter().find_map(|&k| {
        winding_around(f, Contour::Circle { center: z, radius: k * h })
            .ok()
            .map(|w| w.max(0) as u32)
    })
}

/// Whether the dyadic annuli `2^{-j-1} R < |w − z| ≤ 2^{-j} R` around `z`
/// contain other zeros for at least `CLUSTER_ANNULI` consecutive scales
/// ending at the finest resolved one (`4h`).
fn accumulates_at(zeros: &[C64], z: C64, h: f64) -> bool {
    let dists: Vec<f64> = zeros
        .iter()
        .map(|w| (w - z).norm())
        .filter(|&d| d > 0.0)
        .collect();
    let Some(r) = dists.iter().copied().reduce(f64::max) else {
        return false;
    };
    let mut outer = r;
    let mut run = 0;
    while outer > 4.0 * h {
        let inner = 0.5 * outer;
        if dists.iter().any(|&d| d > inner && d <= outer) {
            run += 1;
        } else {
            run = 0;
        }
        outer = inner;
    }
    run >= CLUSTER_ANNULI
}
