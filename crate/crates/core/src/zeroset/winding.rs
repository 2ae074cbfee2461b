use std::f64::consts::PI;

use crate::error::{DbarError, Result};
use crate::grid::interp::{interpolate, Order};
use crate::grid::Field;
use crate::C64;

/// Largest allowed deviation of the raw winding value from an integer.
pub const ROUNDING_SLACK: f64 = 0.1;
/// Contour values below this fraction of the contour maximum count as zero.
pub const MIN_MODULUS_RATIO: f64 = 1e-9;

const MAX_SAMPLES: usize = 1 << 18;

/// A closed contour in the plane of a one-variable grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Contour {
    Circle { center: C64, radius: f64 },
    Square { lo: C64, side: f64 },
    /// Axis-parallel rectangle; `size` holds width and height.
    Rect { lo: C64, size: C64 },
}

impl Contour {
    pub fn circle(center: C64, radius: f64) -> Self {
        Contour::Circle { center, radius }
    }

    fn point(&self, t: f64) -> C64 {
        match *self {
            Contour::Circle { center, radius } => center + C64::from_polar(radius, 2.0 * PI * t),
            Contour::Square { lo, side } => {
                let s = 4.0 * t.rem_euclid(1.0);
                let (k, u) = (s.floor(), s - s.floor());
                let p = match k as u8 {
                    0 => C64::new(u, 0.0),
                    1 => C64::new(1.0, u),
                    2 => C64::new(1.0 - u, 1.0),
                    _ => C64::new(0.0, 1.0 - u),
                };
                lo + p * side
            }
            Contour::Rect { lo, size } => {
                let (w, h) = (size.re, size.im);
                let s = t.rem_euclid(1.0) * 2.0 * (w + h);
                let p = if s < w {
                    C64::new(s, 0.0)
                } else if s < w + h {
                    C64::new(w, s - w)
                } else if s < 2.0 * w + h {
                    C64::new(2.0 * w + h - s, h)
                } else {
                    C64::new(0.0, 2.0 * (w + h) - s)
                };
                lo + p
            }
        }
    }

    fn length(&self) -> f64 {
        match *self {
            Contour::Circle { radius, .. } => 2.0 * PI * radius,
            Contour::Square { side, .. } => 4.0 * side,
            Contour::Rect { size, .. } => 2.0 * (size.re + size.im),
        }
    }
}

/// Raw argument increment of `f` around the contour divided by `2π`.
pub fn winding_value(f: &Field, contour: Contour) -> Result<f64> {
    let h = f.grid().max_spacing();
    let mut n = ((8.0 * contour.length() / h).ceil() as usize).max(256);
    if matches!(contour, Contour::Square { .. }) {
        n = n.div_ceil(4) * 4;
    }
    loop {
        let mut vals = Vec::with_capacity(n);
        for k in 0..n {
            let z = contour.point(k as f64 / n as f64);
            let v = interpolate(f, z, Order::Quintic).ok_or_else(|| {
                DbarError::OutOfDomain(format!("contour point {z} outside the grid"))
            })?;
            vals.push(v);
        }
        let max = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let min = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if !(min > MIN_MODULUS_RATIO * max) {
            return Err(DbarError::ContourThroughZero {
                min_modulus: min,
                max_modulus: max,
            });
        }
        let mut total = 0.0;
        let mut coarse = false;
        for k in 0..n {
            let step = (vals[(k + 1) % n] / vals[k]).arg();
            if step.abs() > PI / 4.0 {
                coarse = true;
            }
            total += step;
        }
        if !coarse || n >= MAX_SAMPLES {
            return Ok(total / (2.0 * PI));
        }
        n *= 2;
    }
}

/// Winding number of `f` around a contour, rounded to the nearest integer.
pub fn winding_around(f: &Field, contour: Contour) -> Result<i64> {
    let w = winding_value(f, contour)?;
    if (w - w.round()).abs() > ROUNDING_SLACK {
        return Err(DbarError::AmbiguousWinding { value: w });
    }
    Ok(w.round() as i64)
}

/// Winding number of `f` around the circle `|z - center| = radius`.
pub fn winding_number(f: &Field, center: C64, radius: f64) -> Result<i64> {
    winding_around(f, Contour::circle(center, radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ComplexGrid, Domain};
    use std::sync::Arc;

    fn square(res: usize, r: f64) -> Arc<ComplexGrid> {
        Arc::new(ComplexGrid::build(Domain::rect(C64::new(-r, -r), C64::new(r, r)), res).unwrap())
    }

    /// Dense-sampling argument principle on the exact function.
    fn oracle(f: impl Fn(C64) -> C64, c: C64, r: f64) -> f64 {
        let n = 200_000;
        let mut total = 0.0;
        for k in 0..n {
            let a = f(c + C64::from_polar(r, 2.0 * PI * k as f64 / n as f64));
            let b = f(c + C64::from_polar(r, 2.0 * PI * (k + 1) as f64 / n as f64));
            total += (b / a).arg();
        }
        total / (2.0 * PI)
    }

    #[test]
    fn standard_examples() {
        let g = square(129, 1.5);
        let o = C64::new(0.0, 0.0);
        let cube = Field::from_fn(g.clone(), |p| p[0] * p[0] * p[0]);
        assert_eq!(winding_number(&cube, o, 1.0).unwrap(), 3);
        let two = |z: C64| (z - 0.3) * (z + C64::new(0.0, 0.5));
        let f = Field::from_fn(g.clone(), move |p| two(p[0]));
        assert_eq!(winding_number(&f, o, 1.0).unwrap(), oracle(two, o, 1.0).round() as i64);
        assert_eq!(winding_number(&f, o, 1.0).unwrap(), 2);
        let e = Field::from_fn(g, |p| p[0].exp());
        assert_eq!(winding_number(&e, o, 1.0).unwrap(), 0);
    }

    #[test]
    fn contour_through_zero_is_reported() {
        let g = square(65, 1.5);
        let f = Field::from_fn(g, |p| p[0] - 1.0);
        assert!(matches!(
            winding_number(&f, C64::new(0.0, 0.0), 1.0),
            Err(DbarError::ContourThroughZero { .. })
        ));
    }

    #[test]
    fn square_and_circle_agree() {
        let g = square(129, 1.5);
        let f = Field::from_fn(g, |p| (p[0] - 0.31) * (p[0] + 0.2) * p[0].conj().exp());
        let sq = Contour::Square {
            lo: C64::new(-0.9, -0.87),
            side: 1.8,
        };
        assert_eq!(winding_around(&f, sq).unwrap(), 2);
    }
}
