use serde::{Deserialize, Serialize};

use crate::error::{DbarError, Result};
use crate::grid::{lp_norm, Field};
use crate::transforms::{dz, dzbar};
use crate::C64;

/// Exponent of the reported `L^p` norm of the inequality constant.
const C_EXPONENT: f64 = 4.0;
/// `|v − v₁|` at or below this leaves the ratio undefined; such cells get 0.
const COINCIDENCE: f64 = 1e-12;

/// Structure matrix `Q(w)` in a chart where `J` is standard at `Q = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum QModel {
    Zero,
    /// `Q ≡ q·I`.
    Constant { q: C64 },
    /// `Q(w) = scale · w_coordinate · I`; zero on `{w_coordinate = 0}`.
    ScaledCoordinate { scale: f64, coordinate: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlmostComplexStructure {
    pub n: usize,
    pub model: QModel,
}

#[derive(Clone, Debug, Serialize)]
pub struct JholReport {
    #[serde(skip)]
    pub residual: Field,
    pub max_residual: f64,
    /// `|Q(v) conj ∂v − Q(v₁) conj ∂v₁| / |v − v₁|` against `v₁ = (z, 0, …)`.
    #[serde(skip)]
    pub c: Field,
    pub c_max: f64,
    pub c_lp: f64,
    pub q_max: f64,
}

impl AlmostComplexStructure {
    pub fn standard(n: usize) -> Self {
        AlmostComplexStructure { n, model: QModel::Zero }
    }

    pub fn scaled_coordinate(n: usize, scale: f64, coordinate: usize) -> Result<Self> {
        if coordinate >= n {
            return Err(DbarError::InvalidInput(format!("coordinate {coordinate} out of range for n = {n}")));
        }
        Ok(AlmostComplexStructure {
            n,
            model: QModel::ScaledCoordinate { scale, coordinate },
        })
    }

    /// The scalar `s` with `Q(w) = s·I`.
    pub fn factor(&self, w: &[C64]) -> C64 {
        match self.model {
            QModel::Zero => C64::new(0.0, 0.0),
            QModel::Constant { q } => q,
            QModel::ScaledCoordinate { scale, coordinate } => w[coordinate] * scale,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self.model {
            QModel::Zero | QModel::Constant { .. } => 0.0,
            QModel::ScaledCoordinate { scale, .. } => scale.abs(),
        }
    }

    fn check(&self, v: &Field) -> Result<()> {
        if self.n == 0 || self.n > 2 {
            return Err(DbarError::InvalidInput(format!("n = {} must be 1 or 2", self.n)));
        }
        if v.rows() != self.n || v.cols() != 1 {
            return Err(DbarError::InvalidInput(format!(
                "curve has shape {}x{}, structure expects {}x1",
                v.rows(),
                v.cols(),
                self.n
            )));
        }
        if v.grid().nvars() != 1 {
            return Err(DbarError::InvalidInput("curves live on one-variable grids".into()));
        }
        Ok(())
    }
}

fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `R = ∂̄v − Q(v) conj(∂v)` and the cell-wise constant of the difference
/// inequality against the reference curve `(z, 0, …)`.
pub fn jhol_residual(v: &Field, j: &AlmostComplexStructure) -> Result<JholReport> {
    j.check(v)?;
    let grid = v.grid_arc().clone();
    let vz = dz(v, 0);
    let vzbar = dzbar(v, 0);
    let mut q_max = 0.0f64;
    for i in (0..grid.len()).filter(|&i| grid.mask()[i]) {
        // row sums of s·I are |s|
        q_max = q_max.max(j.factor(v.cell(i)).norm());
    }
    if q_max >= 1.0 {
        return Err(DbarError::StructureOutOfRange(q_max));
    }
    let residual = match j.model {
        QModel::Zero => vzbar,
        _ => {
            let mut vals = vzbar.values().to_vec();
            for i in 0..grid.len() {
                let s = j.factor(v.cell(i));
                for r in 0..j.n {
                    vals[i * j.n + r] -= s * vz.cell(i)[r].conj();
                }
            }
            Field::new(grid.clone(), j.n, 1, vals)?
        }
    };

    let mut c = vec![C64::new(0.0, 0.0); grid.len()];
    for (i, ci) in c.iter_mut().enumerate() {
        if !grid.mask()[i] {
            continue;
        }
        let z = grid.z(i);
        let mut reference = vec![C64::new(0.0, 0.0); j.n];
        reference[0] = z;
        // ∂v₁ = (1, 0, …)
        let mut ref_dz = vec![C64::new(0.0, 0.0); j.n];
        ref_dz[0] = C64::new(1.0, 0.0);
        let diff: Vec<C64> = v.cell(i).iter().zip(&reference).map(|(a, b)| a - b).collect();
        let gap = vec_norm(&diff);
        if gap <= COINCIDENCE {
            continue;
        }
        let s = j.factor(v.cell(i));
        let s1 = j.factor(&reference);
        let num: Vec<C64> = (0..j.n)
            .map(|r| s * vz.cell(i)[r].conj() - s1 * ref_dz[r].conj())
            .collect();
        *ci = C64::new(vec_norm(&num) / gap, 0.0);
    }
    let c = Field::scalar(grid.clone(), c)?;
    let max_residual = (0..grid.len())
        .filter(|&i| grid.mask()[i])
        .map(|i| residual.cell_modulus(i))
        .fold(0.0, f64::max);
    Ok(JholReport {
        max_residual,
        c_max: lp_norm(&c, f64::INFINITY, None)?,
        c_lp: lp_norm(&c, C_EXPONENT, None)?,
        residual,
        c,
        q_max,
    })
}
