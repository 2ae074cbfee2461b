use std::sync::Arc;

use serde::Serialize;

use super::cauchy::cauchy_transform_on;
use crate::error::{DbarError, Result};
use crate::grid::{holder_norm, lp_norm, ComplexGrid, Domain, Exponent, Field};
use crate::numeric::fit_line;
use crate::C64;

/// Fewest cells across a sampled disc radius.
const MIN_CELLS_PER_RADIUS: f64 = 6.0;

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    /// Exponent; `None` stands for `p = ∞`.
    pub p: Option<f64>,
    pub deltas: Vec<f64>,
    /// `sup |T(f 1_{D_δ})|` per radius.
    pub measured_sup: Vec<f64>,
    /// `‖f‖_{L^p(D_δ)}` per radius.
    pub lp_norms: Vec<f64>,
    /// Slope of `log(sup|Tf| / ‖f‖_p)` against `log δ`.
    pub fitted_exponent: f64,
    pub expected_exponent: f64,
    /// `exp(intercept)` of the same fit.
    pub fitted_constant: f64,
    /// For `p = ∞`: largest relative deviation of the data from the best
    /// multiple of `δ(1 + |log δ|)`.
    pub profile_fit_error: Option<f64>,
    pub profile_constant: Option<f64>,
    /// Hölder-`(1 − 2/p)` seminorm of `Tf` over `‖f‖_p` on the largest disc
    /// (finite `p` only).
    pub holder_check: Option<f64>,
    pub degenerate: bool,
}

/// `φ_p(δ)`: `δ^{1−2/p}`, or `δ(1 + |log δ|)` for `p = ∞`.
pub fn phi(p: Exponent, delta: f64) -> f64 {
    match p {
        Exponent::Finite(p) => delta.powf(1.0 - 2.0 / p),
        Exponent::Infinity => delta * (1.0 + delta.ln().abs()),
    }
}

/// Dyadic radii `r, r/2, r/4, …` inside the grid's domain that still span
/// at least six cells.
pub fn default_deltas(grid: &ComplexGrid) -> Vec<f64> {
    let r0 = match grid.domain() {
        Domain::Disc { center, radius } if center.norm() == 0.0 => *radius,
        _ => {
            let o = grid.origin();
            let s = grid.spacing();
            let n = grid.shape();
            (0..2)
                .map(|a| (-o[a]).min(o[a] + (n[a] - 1) as f64 * s[a]))
                .fold(f64::INFINITY, f64::min)
        }
    };
    let h = grid.max_spacing();
    let mut out = Vec::new();
    let mut d = r0;
    while d / h >= MIN_CELLS_PER_RADIUS && out.len() < 8 {
        out.push(d);
        d *= 0.5;
    }
    out
}

/// Regress `sup |T(f restricted to D_δ)|` against `δ` on nested discs
/// centred at the origin and compare with the exponent `1 − 2/p`.
pub fn verify_cauchy_estimates(f: &Field, p: f64, deltas: Option<&[f64]>) -> Result<EstimateReport> {
    let exp = Exponent::new(p)?;
    if let Exponent::Finite(pv) = exp {
        if pv <= 2.0 {
            return Err(DbarError::UnsupportedExponent(pv));
        }
    }
    let grid = f.grid();
    if grid.nvars() != 1 {
        return Err(DbarError::InvalidInput("estimates need a one-variable grid".into()));
    }
    let deltas: Vec<f64> = match deltas {
        Some(d) => d.to_vec(),
        None => default_deltas(grid),
    };
    if deltas.len() < 4 {
        return Err(DbarError::Resolution(format!(
            "only {} admissible radii; need at least 4",
            deltas.len()
        )));
    }
    let target = f.grid_arc().clone();
    let mut sups = Vec::new();
    let mut norms = Vec::new();
    let mut largest: Option<(Field, f64)> = None;
    for &d in &deltas {
        let sub = Arc::new(ComplexGrid::from_parts(
            Domain::disc(C64::new(0.0, 0.0), d),
            grid.origin().to_vec(),
            grid.spacing().to_vec(),
            grid.shape().to_vec(),
            Some(grid.mask().to_vec()),
        )?);
        let fd = f.with_grid(sub)?;
        let norm = lp_norm(&fd, p, None)?;
        let tf = if norm > 0.0 {
            cauchy_transform_on(&fd, target.clone())?
        } else {
            Field::zeros(target.clone(), f.rows(), f.cols())
        };
        let sup = (0..target.len())
            .filter(|&i| target.mask()[i])
            .map(|i| tf.cell_modulus(i))
            .fold(0.0, f64::max);
        if largest.is_none() {
            largest = Some((tf, norm));
        }
        sups.push(sup);
        norms.push(norm);
    }
    let expected = match exp {
        Exponent::Finite(p) => 1.0 - 2.0 / p,
        Exponent::Infinity => 1.0,
    };
    let degenerate = sups.iter().chain(&norms).any(|&v| !(v > 0.0));
    let mut report = EstimateReport {
        p: match exp {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinity => None,
        },
        deltas: deltas.clone(),
        measured_sup: sups.clone(),
        lp_norms: norms.clone(),
        fitted_exponent: 0.0,
        expected_exponent: expected,
        fitted_constant: 0.0,
        profile_fit_error: None,
        profile_constant: None,
        holder_check: None,
        degenerate,
    };
    if degenerate {
        return Ok(report);
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = sups.iter().zip(&norms).map(|(s, n)| (s / n).ln()).collect();
    let (slope, intercept) = fit_line(&xs, &ys);
    report.fitted_exponent = slope;
    report.fitted_constant = intercept.exp();
    match exp {
        Exponent::Infinity => {
            // best multiple in the log-least-squares sense
            let logs: Vec<f64> = deltas
                .iter()
                .zip(&ys)
                .map(|(&d, &y)| y - phi(exp, d).ln())
                .collect();
            let c = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
            let err = deltas
                .iter()
                .zip(&ys)
                .map(|(&d, &y)| (y.exp() / (c * phi(exp, d)) - 1.0).abs())
                .fold(0.0, f64::max);
            report.profile_constant = Some(c);
            report.profile_fit_error = Some(err);
        }
        Exponent::Finite(pv) => {
            let (tf, norm) = largest.expect("at least one radius");
            report.holder_check = Some(holder_norm(&tf, 1.0 - 2.0 / pv) / norm);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(res: usize) -> Arc<ComplexGrid> {
        Arc::new(ComplexGrid::build(Domain::unit_disc(), res).unwrap())
    }

    #[test]
    fn constant_input_scales_with_expected_exponent() {
        let g = disc(256);
        let one = Field::constant(g, C64::new(1.0, 0.0));
        let r = verify_cauchy_estimates(&one, 4.0, None).unwrap();
        assert!(!r.degenerate);
        assert!((r.fitted_exponent - 0.5).abs() < 0.1, "{:?}", r);
    }

    #[test]
    fn zero_input_is_degenerate() {
        let g = disc(128);
        let r = verify_cauchy_estimates(&Field::zeros(g, 1, 1), 4.0, None).unwrap();
        assert!(r.degenerate);
        assert!(r.measured_sup.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn exponents_at_most_two_are_rejected() {
        let g = disc(64);
        let one = Field::constant(g, C64::new(1.0, 0.0));
        assert!(matches!(
            verify_cauchy_estimates(&one, 2.0, None),
            Err(DbarError::UnsupportedExponent(_))
        ));
    }
}
