use serde::{Deserialize, Serialize};

use crate::grid::{ComplexGrid, Field};
use crate::C64;

/// Middle-thirds Cantor dust on a horizontal segment, approximated by the
/// midpoints of its `2^levels` generation intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantorSpec {
    pub center: C64,
    pub length: f64,
    pub levels: u32,
}

impl CantorSpec {
    pub fn points(&self) -> Vec<C64> {
        let mut intervals = vec![(self.center.re - 0.5 * self.length, self.length)];
        for _ in 0..self.levels {
            intervals = intervals
                .into_iter()
                .flat_map(|(a, l)| [(a, l / 3.0), (a + 2.0 * l / 3.0, l / 3.0)])
                .collect();
        }
        intervals
            .into_iter()
            .map(|(a, l)| C64::new(a + 0.5 * l, self.center.im))
            .collect()
    }
}

/// A finite exceptional set `E` with the potential
/// `ρ(z) = (1/|E|) Σ log|z − p|`, which is `−∞` exactly on `E`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarSetSpec {
    #[serde(default)]
    pub points: Vec<C64>,
    #[serde(default)]
    pub cantor: Option<CantorSpec>,
}

impl PolarSetSpec {
    pub fn finite(points: Vec<C64>) -> Self {
        PolarSetSpec {
            points,
            cantor: None,
        }
    }

    pub fn empty() -> Self {
        PolarSetSpec::default()
    }

    /// Explicit points followed by the Cantor approximation, if any.
    pub fn all_points(&self) -> Vec<C64> {
        let mut out = self.points.clone();
        if let Some(c) = &self.cantor {
            out.extend(c.points());
        }
        out
    }

    pub fn potential_at(&self, z: C64) -> f64 {
        let pts = self.all_points();
        if pts.is_empty() {
            return 0.0;
        }
        pts.iter().map(|p| (z - p).norm().ln()).sum::<f64>() / pts.len() as f64
    }

    /// `ρ` sampled at cell centres: the real part holds the value, `−∞` on
    /// marker cells.
    pub fn potential(&self, grid: &std::sync::Arc<ComplexGrid>) -> Field {
        let markers = self.markers(grid);
        let pts = self.all_points();
        let n = pts.len().max(1) as f64;
        let values = (0..grid.len())
            .map(|i| {
                if markers[i] {
                    C64::new(f64::NEG_INFINITY, 0.0)
                } else {
                    let z = grid.z(i);
                    C64::new(pts.iter().map(|p| (z - p).norm().ln()).sum::<f64>() / n, 0.0)
                }
            })
            .collect();
        Field::scalar(grid.clone(), values).expect("one value per cell")
    }

    /// The cell nearest to each point of `E` (one marker per point).
    pub fn markers(&self, grid: &ComplexGrid) -> Vec<bool> {
        let mut out = vec![false; grid.len()];
        for p in self.all_points() {
            if let Some((a, b)) = grid.nearest_node(0, p) {
                out[grid.ravel(&[a, b])] = true;
            }
        }
        out
    }

    /// Distance from each cell centre to `E` (`∞` when `E` is empty).
    pub fn distances(&self, grid: &ComplexGrid) -> Vec<f64> {
        let pts = self.all_points();
        (0..grid.len())
            .map(|i| {
                let z = grid.z(i);
                pts.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_generation_counts() {
        let c = CantorSpec {
            center: C64::new(0.0, 0.0),
            length: 0.9,
            levels: 3,
        };
        let pts = c.points();
        assert_eq!(pts.len(), 8);
        assert!(pts.iter().all(|p| p.re.abs() < 0.45));
    }

    #[test]
    fn potential_is_minus_infinity_on_the_set() {
        let e = PolarSetSpec::finite(vec![C64::new(0.25, 0.0)]);
        assert_eq!(e.potential_at(C64::new(0.25, 0.0)), f64::NEG_INFINITY);
        assert!(e.potential_at(C64::new(0.0, 0.0)).is_finite());
    }
}
