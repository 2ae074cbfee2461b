use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::slice_roots::{count_zeros_slice, Root};
use crate::error::{DbarError, Result};
use crate::grid::{slice, ComplexGrid, Field, LineAxis};
use crate::C64;

/// Largest root count matched by exhaustive search; larger counts fall back
/// to a greedy pairing.
const EXHAUSTIVE_LIMIT: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct SliceRoots {
    /// Cell index of `z1` in the parameter grid.
    pub index: usize,
    pub z1: C64,
    pub roots: Vec<Root>,
}

impl SliceRoots {
    pub fn expanded(&self) -> Vec<C64> {
        let mut out = Vec::new();
        for r in &self.roots {
            out.extend(std::iter::repeat(r.z).take(r.multiplicity));
        }
        out
    }
}

/// Pairing between the expanded root lists of two neighbouring slices:
/// `pairs[i] = (i, j)` sends root `i` of `from` to root `j` of `to`.
#[derive(Clone, Debug, Serialize)]
pub struct Matching {
    pub from: usize,
    pub to: usize,
    pub pairs: Vec<(usize, usize)>,
    pub max_displacement: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroChart {
    pub eps0: f64,
    pub n: usize,
    /// Lattice spacing of the slice variable.
    pub spacing: f64,
    #[serde(skip)]
    pub param_grid: Arc<ComplexGrid>,
    pub slices: Vec<SliceRoots>,
    pub matchings: Vec<Matching>,
}

impl ZeroChart {
    /// Position of the slice over parameter cell `index`.
    pub fn slice_at(&self, index: usize) -> Option<&SliceRoots> {
        self.slices
            .binary_search_by_key(&index, |s| s.index)
            .ok()
            .map(|k| &self.slices[k])
    }

    /// Largest displacement of a matched root between neighbouring slices.
    pub fn max_displacement(&self) -> f64 {
        self.matchings
            .iter()
            .map(|m| m.max_displacement)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Locate the zeros of every slice `z1 = const` inside `|z2| < eps0`, over
/// the parameter nodes whose centres lie in the first factor of the
/// domain, and match roots between neighbouring slices.
pub fn track_zero_graphs(f: &Field, eps0: f64) -> Result<ZeroChart> {
    let grid = f.grid();
    if grid.nvars() != 2 || !f.is_scalar() {
        return Err(DbarError::InvalidInput(
            "zero tracking needs a scalar field on a two-variable grid".into(),
        ));
    }
    let param = Arc::new(grid.factor_grid(0));
    let nodes: Vec<usize> = (0..param.len())
        .filter(|&i| param.mask()[i] && param.center_inside(i))
        .collect();
    let counted = nodes
        .par_iter()
        .map(|&i| {
            let z1 = param.z(i);
            let wrap = |e: DbarError| DbarError::Slice {
                index: i,
                source: Box::new(e),
            };
            let line = slice(f, LineAxis::FixFirst, z1).map_err(wrap)?;
            let count = count_zeros_slice(&line, eps0).map_err(wrap)?;
            Ok((count.n, SliceRoots { index: i, z1, roots: count.roots }))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = match counted.first() {
        Some((n, _)) => *n,
        None => {
            return Err(DbarError::InvalidInput(
                "no parameter nodes inside the domain".into(),
            ))
        }
    };
    let mut slices = Vec::with_capacity(counted.len());
    for (found, s) in counted {
        if found != n {
            return Err(DbarError::InconsistentSliceCount {
                index: s.index,
                expected: n,
                found,
            });
        }
        slices.push(s);
    }

    let pos: std::collections::HashMap<usize, usize> =
        slices.iter().enumerate().map(|(k, s)| (s.index, k)).collect();
    let mut matchings = Vec::new();
    for (k, s) in slices.iter().enumerate() {
        let [a, b, ..] = param.unravel(s.index);
        // predecessor: the neighbour along the second axis, else the first
        let prev = if b > 0 {
            pos.get(&param.ravel(&[a, b - 1]))
        } else {
            None
        }
        .or_else(|| if a > 0 { pos.get(&param.ravel(&[a - 1, b])) } else { None });
        let Some(&j) = prev else { continue };
        let (from, to) = (slices[j].expanded(), s.expanded());
        let pairs = match_roots(&from, &to);
        let max_displacement = pairs
            .iter()
            .map(|&(x, y)| (from[x] - to[y]).norm())
            .fold(0.0, f64::max);
        matchings.push(Matching {
            from: j,
            to: k,
            pairs,
            max_displacement,
        });
    }

    Ok(ZeroChart {
        eps0,
        n,
        spacing: grid.var_spacing(1),
        param_grid: param,
        slices,
        matchings,
    })
}

/// Assignment minimising the total displacement; among minimisers the
/// lexicographically smallest permutation wins.
pub fn match_roots(from: &[C64], to: &[C64]) -> Vec<(usize, usize)> {
    let n = from.len().min(to.len());
    if n == 0 {
        return Vec::new();
    }
    if n > EXHAUSTIVE_LIMIT {
        let mut used = vec![false; to.len()];
        return (0..n)
            .map(|i| {
                let j = (0..to.len())
                    .filter(|&j| !used[j])
                    .min_by(|&x, &y| (from[i] - to[x]).norm().total_cmp(&(from[i] - to[y]).norm()))
                    .unwrap();
                used[j] = true;
                (i, j)
            })
            .collect();
    }
    let mut perm: Vec<usize> = (0..to.len()).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    permute(&mut perm, 0, n, &mut |p| {
        let cost: f64 = (0..n).map(|i| (from[i] - to[p[i]]).norm()).sum();
        let better = match &best {
            None => true,
            Some((c, q)) => cost < *c - 1e-15 * c.abs() || (cost <= *c && p[..n] < q[..]),
        };
        if better {
            best = Some((cost, p[..n].to_vec()));
        }
    });
    let (_, p) = best.expect("nonempty permutation set");
    p.into_iter().enumerate().collect()
}

fn permute(p: &mut Vec<usize>, k: usize, n: usize, visit: &mut impl FnMut(&[usize])) {
    if k == n {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, n, visit);
        p.swap(k, i);
    }
}

/// Continuous `n`-th root of a one-variable field by phase unwrapping
/// outward from the node nearest `anchor`, where the root takes the
/// principal branch. Cells where `|f|` is negligible are left at zero and
/// not crossed.
pub fn nth_root_slice(line: &Field, n: u32, anchor: C64) -> Result<Field> {
    let g = line.grid_arc().clone();
    if g.nvars() != 1 || !line.is_scalar() || n == 0 {
        return Err(DbarError::InvalidInput("nth root needs a scalar one-variable field".into()));
    }
    let (a0, b0) = g
        .nearest_node(0, anchor)
        .ok_or_else(|| DbarError::OutOfDomain(format!("anchor {anchor} outside the grid")))?;
    let floor = 1e-12 * line.max_modulus();
    let live = |i: usize| g.mask()[i] && line.at(i).norm() > floor;
    let start = g.ravel(&[a0, b0]);
    if !live(start) {
        return Err(DbarError::InvalidInput("the field vanishes at the anchor".into()));
    }
    let (nx, ny) = (g.shape()[0], g.shape()[1]);
    let mut phase = vec![f64::NAN; g.len()];
    phase[start] = line.at(start).arg();
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        let [a, b, ..] = g.unravel(i);
        let nbrs = [
            (a > 0).then(|| [a - 1, b]),
            (a + 1 < nx).then(|| [a + 1, b]),
            (b > 0).then(|| [a, b - 1]),
            (b + 1 < ny).then(|| [a, b + 1]),
        ];
        for idx in nbrs.into_iter().flatten() {
            let j = g.ravel(&idx);
            if phase[j].is_nan() && live(j) {
                phase[j] = phase[i] + (line.at(j) / line.at(i)).arg();
                queue.push_back(j);
            }
        }
    }
    let inv = 1.0 / n as f64;
    let values = (0..g.len())
        .map(|i| {
            if phase[i].is_nan() {
                C64::new(0.0, 0.0)
            } else {
                C64::from_polar(line.at(i).norm().powf(inv), phase[i] * inv)
            }
        })
        .collect();
    Field::scalar(g, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;

    #[test]
    fn matching_prefers_small_moves() {
        let from = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let to = [C64::new(1.01, 0.0), C64::new(0.02, 0.0)];
        assert_eq!(match_roots(&from, &to), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn ties_break_lexicographically() {
        let from = [C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let to = [C64::new(0.5, 0.0), C64::new(0.5, 0.0)];
        assert_eq!(match_roots(&from, &to), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn constant_graph() {
        let g = Arc::new(ComplexGrid::build_with_shape(Domain::polydisc([0.25, 0.8]), &[9, 9, 65, 65]).unwrap());
        let f = Field::from_fn(g, |p| p[1] - 0.3);
        let chart = track_zero_graphs(&f, 0.6).unwrap();
        assert_eq!(chart.n, 1);
        for s in &chart.slices {
            assert!((s.roots[0].z - 0.3).norm() < 1e-9);
        }
        assert!(chart.max_displacement() < 1e-9);
    }

    #[test]
    fn square_root_of_a_square() {
        let g = Arc::new(ComplexGrid::build(Domain::unit_disc(), 65).unwrap());
        let b = |z: C64| (z - 0.5) * (1.0 + 0.3 * z.conj());
        let f = Field::from_fn(g.clone(), move |p| b(p[0]) * b(p[0]));
        let root = nth_root_slice(&f, 2, C64::new(0.0, 0.0)).unwrap();
        let sign = root.at(g.ravel(&[32, 32])) / b(C64::new(0.0, 0.0));
        for i in 0..g.len() {
            if g.mask()[i] && (g.z(i) - 0.5).norm() > 0.1 {
                assert!((root.at(i) - sign * b(g.z(i))).norm() < 1e-9);
            }
        }
    }
}
