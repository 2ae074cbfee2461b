use serde::Serialize;

use super::params::ContractionParams;
use crate::error::{DbarError, Result};
use crate::grid::{Domain, Exponent, Field, OneForm};
use crate::transforms::dbar::interior;
use crate::transforms::{cauchy_transform, dbar};
use crate::C64;

/// Cells with `|f|` at most this fraction of `max|f|` belong to the
/// numerical zero set.
pub const ZERO_FLOOR: f64 = 1e-12;
/// Holomorphy residuals on a disc are measured on this fraction of it.
pub const INNER_FRACTION: f64 = 0.8;

#[derive(Clone, Debug, Serialize)]
pub struct ScalarFactor {
    #[serde(skip)]
    pub u: Field,
    /// `F = e^{-u} f`.
    #[serde(skip)]
    pub factor: Field,
    /// Max `|∂̄F|` away from the boundary of the domain.
    pub dbar_residual: f64,
}

pub(crate) fn require_exponent(params: &ContractionParams) -> Result<()> {
    match params.p {
        Exponent::Finite(v) if v <= 2.0 => Err(DbarError::UnsupportedExponent(v)),
        _ => Ok(()),
    }
}

/// Coefficient of `A` set to zero where `|f| ≤ ZERO_FLOOR · max|f|`.
pub fn extend_by_zero(f: &Field, a: &Field) -> Result<Field> {
    let floor = ZERO_FLOOR * f.max_modulus();
    let k = a.cell_len();
    let mut out = a.clone();
    for i in 0..f.grid().len() {
        if f.cell_modulus(i) <= floor {
            out.values_mut()[i * k..(i + 1) * k].fill(C64::new(0.0, 0.0));
        }
    }
    Ok(out)
}

/// `u = T(a)` and `F = e^{-u} f` for a scalar `f` on a one-variable grid
/// with `A = a dz̄`.
pub fn integrating_factor_scalar(
    f: &Field,
    a: &OneForm,
    params: &ContractionParams,
) -> Result<ScalarFactor> {
    require_exponent(params)?;
    if f.grid().nvars() != 1 || !f.is_scalar() {
        return Err(DbarError::InvalidInput(
            "scalar factor needs a scalar field on a one-variable grid".into(),
        ));
    }
    let coef = a.component(0);
    if !coef.is_scalar() {
        return Err(DbarError::InvalidInput("coefficient must be scalar".into()));
    }
    f.check_same_layout(coef)?;
    let coef = extend_by_zero(f, &coef.masked())?;
    let u = cauchy_transform(&coef)?;
    let factor = f.zip_map(&u, |v, w| v * (-w).exp())?;
    let dbar_residual = holomorphy_residual(&factor);
    Ok(ScalarFactor {
        u,
        factor,
        dbar_residual,
    })
}

/// Max entry modulus of `∂̄F` over cells at least two steps inside the
/// mask and, on a disc, inside the concentric disc of radius
/// `INNER_FRACTION · r`, away from the boundary layer of the cut cells.
pub(crate) fn holomorphy_residual(f: &Field) -> f64 {
    let d = dbar(f);
    let g = f.grid();
    let mut inner = interior(g, 2);
    if let Domain::Disc { center, radius } = g.domain() {
        for (i, v) in inner.iter_mut().enumerate() {
            *v &= (g.z(i) - center).norm() <= INNER_FRACTION * radius;
        }
    }
    let mut worst = 0.0f64;
    for comp in d.components() {
        let k = comp.cell_len();
        for i in 0..g.len() {
            if inner[i] && g.center_inside(i) {
                for v in &comp.values()[i * k..(i + 1) * k] {
                    worst = worst.max(v.norm());
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ComplexGrid, Domain};
    use std::sync::Arc;

    #[test]
    fn zero_coefficient_is_identity() {
        let g = Arc::new(ComplexGrid::build(Domain::unit_disc(), 32).unwrap());
        let f = Field::from_fn(g.clone(), |p| p[0] * p[0] + 0.3);
        let params = ContractionParams::new(4.0, 1.0, 0.0, 1.0, 1).unwrap();
        let out = integrating_factor_scalar(&f, &OneForm::zeros(g, 1, 1), &params).unwrap();
        assert!(out.u.max_modulus() == 0.0);
        assert_eq!(out.factor.values(), f.values());
    }

    #[test]
    fn exponent_two_is_rejected() {
        let g = Arc::new(ComplexGrid::build(Domain::unit_disc(), 16).unwrap());
        let f = Field::constant(g.clone(), C64::new(1.0, 0.0));
        let mut params = ContractionParams::new(4.0, 1.0, 0.0, 1.0, 1).unwrap();
        params.p = Exponent::Finite(2.0);
        let err = integrating_factor_scalar(&f, &OneForm::zeros(g, 1, 1), &params).unwrap_err();
        assert!(matches!(err, DbarError::UnsupportedExponent(_)));
    }
}
