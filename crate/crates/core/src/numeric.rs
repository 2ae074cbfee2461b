//! Small numerical helpers shared across modules.

use crate::C64;

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (tree) summation in a fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_sum_complex(values: &[C64]) -> C64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
}

/// Ordinary least-squares line `y = slope * x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Median of a slice (NaNs are not expected).
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Cubic smoothstep on `[0, 1]`, clamped outside.
pub fn smoothstep(x: f64) -> f64 {
    let t = x.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Standard compactly supported bump `exp(-1/(1-r^2))` for `r < 1`.
pub fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// Area of the intersection of the disc `|z - c| < r` with the rectangle
/// `[x0, x1] x [y0, y1]`, in closed form.
pub fn disc_rect_area(c: C64, r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    // Shift to disc-centred coordinates.
    let (x0, x1) = (x0 - c.re, x1 - c.re);
    let (y0, y1) = (y0 - c.im, y1 - c.im);
    let a = x0.max(-r);
    let b = x1.min(r);
    if a >= b || y0 >= r || y1 <= -r {
        return 0.0;
    }
    let half = |x: f64| (r * r - x * x).max(0.0).sqrt();
    // Antiderivative of sqrt(r^2 - x^2).
    let prim = |x: f64| {
        let x = x.clamp(-r, r);
        0.5 * (x * half(x) + r * r * (x / r).clamp(-1.0, 1.0).asin())
    };
    let mut breaks = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < r {
            let s = half(y);
            breaks.push(-s);
            breaks.push(s);
        }
    }
    breaks.retain(|&x| x >= a && x <= b);
    breaks.sort_by(|p, q| p.total_cmp(q));
    breaks.dedup();

    let mut area = 0.0;
    for w in breaks.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let m = 0.5 * (u + v);
        let s = half(m);
        let top_is_circle = s < y1;
        let bottom_is_circle = -s > y0;
        if s.min(y1) <= (-s).max(y0) {
            continue;
        }
        let top = if top_is_circle {
            prim(v) - prim(u)
        } else {
            y1 * (v - u)
        };
        let bottom = if bottom_is_circle {
            -(prim(v) - prim(u))
        } else {
            y0 * (v - u)
        };
        area += top - bottom;
    }
    area.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disc_rect_area_matches_whole_disc_and_quarter() {
        let c = C64::new(0.0, 0.0);
        assert!((disc_rect_area(c, 1.0, -2.0, 2.0, -2.0, 2.0) - PI).abs() < 1e-14);
        assert!((disc_rect_area(c, 1.0, 0.0, 2.0, 0.0, 2.0) - PI / 4.0).abs() < 1e-14);
        assert_eq!(disc_rect_area(c, 1.0, 1.5, 2.0, 0.0, 2.0), 0.0);
    }

    #[test]
    fn disc_rect_area_agrees_with_sampling() {
        let c = C64::new(0.1, -0.2);
        let (x0, x1, y0, y1) = (0.3, 0.9, -0.4, 0.35);
        let n = 2000;
        let mut hits = 0usize;
        for i in 0..n {
            for j in 0..n {
                let x = x0 + (i as f64 + 0.5) * (x1 - x0) / n as f64;
                let y = y0 + (j as f64 + 0.5) * (y1 - y0) / n as f64;
                if (C64::new(x, y) - c).norm() < 0.8 {
                    hits += 1;
                }
            }
        }
        let sampled = hits as f64 / (n * n) as f64 * (x1 - x0) * (y1 - y0);
        let exact = disc_rect_area(c, 0.8, x0, x1, y0, y1);
        assert!((sampled - exact).abs() < 1e-4, "{sampled} vs {exact}");
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
    }

    #[test]
    fn fit_line_recovers_slope() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (s, b) = fit_line(&xs, &ys);
        assert!((s - 2.5).abs() < 1e-12 && (b + 1.0).abs() < 1e-12);
    }
}
