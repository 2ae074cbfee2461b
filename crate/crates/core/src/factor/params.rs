use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use serde::Serialize;

use crate::error::{DbarError, Result};
use crate::grid::{ComplexGrid, Domain, Exponent, Field};
use crate::transforms::{default_deltas, phi, verify_cauchy_estimates};
use crate::C64;

/// Admissibility threshold for `c_{p,m} M φ_p(δ)`.
pub const CONTRACTION_LIMIT: f64 = 0.5;
const MAX_HALVINGS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContractionParams {
    #[serde(serialize_with = "exponent_as_number")]
    pub p: Exponent,
    pub delta: f64,
    /// Uniform `L^p` bound of the coefficient on discs of radius `delta`.
    pub m_bound: f64,
    pub c_pm: f64,
    /// Matrix dimension.
    pub m: usize,
}

fn exponent_as_number<S: serde::Serializer>(p: &Exponent, s: S) -> std::result::Result<S::Ok, S::Error> {
    match p {
        Exponent::Finite(v) => s.serialize_f64(*v),
        Exponent::Infinity => s.serialize_str("inf"),
    }
}

impl ContractionParams {
    pub fn new(p: f64, delta: f64, m_bound: f64, c_pm: f64, m: usize) -> Result<Self> {
        let p = Exponent::new(p)?;
        if let Exponent::Finite(v) = p {
            if v <= 2.0 {
                return Err(DbarError::UnsupportedExponent(v));
            }
        }
        if !(delta > 0.0) || !(m_bound >= 0.0) || !(c_pm > 0.0) || m == 0 {
            return Err(DbarError::InvalidInput(format!(
                "contraction parameters out of range: δ = {delta}, M = {m_bound}, c = {c_pm}, m = {m}"
            )));
        }
        Ok(ContractionParams {
            p,
            delta,
            m_bound,
            c_pm,
            m,
        })
    }

    pub fn phi(&self) -> f64 {
        phi(self.p, self.delta)
    }

    /// `c_{p,m} M φ_p(δ)`.
    pub fn product(&self) -> f64 {
        self.c_pm * self.m_bound * self.phi()
    }

    pub fn admissible(&self) -> bool {
        self.product() < CONTRACTION_LIMIT
    }

    /// Bound `2 c_{p,m} M φ_p(δ)` on the sup norm of the fixed point.
    pub fn g_bound(&self) -> f64 {
        2.0 * self.product()
    }

    /// Largest `δ / 2^k` that is admissible with the same `M`.
    pub fn suggested_delta(&self) -> f64 {
        let mut q = *self;
        for _ in 0..MAX_HALVINGS {
            if q.admissible() {
                return q.delta;
            }
            q.delta *= 0.5;
        }
        q.delta
    }

    pub fn check(&self) -> Result<()> {
        if self.admissible() {
            Ok(())
        } else {
            Err(DbarError::ContractionViolation {
                product: self.product(),
                suggested_delta: self.suggested_delta(),
            })
        }
    }

    /// Halve `δ` until admissible. The bound `M` is kept, which is valid
    /// since the `L^p` norm over a smaller disc can only decrease.
    pub fn shrink_to_admissible(&self) -> Self {
        ContractionParams {
            delta: self.suggested_delta(),
            ..*self
        }
    }
}

/// `c_p` for the sharp Hölder bound of `T` at the centre of a disc,
/// `(1/π) (2π / (2 − q))^{1/q}` with `q` the conjugate exponent.
pub fn analytic_cp(p: Exponent) -> f64 {
    let q = p.conjugate();
    (2.0 * PI / (2.0 - q)).powf(1.0 / q) / PI
}

#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    pub c_p: f64,
    pub c_pm: f64,
    pub analytic_cp: f64,
    pub deltas: Vec<f64>,
    /// `sup|T f_δ| / (‖f_δ‖_p φ_p(δ))` per probe and radius.
    pub ratios: Vec<Vec<f64>>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    p: u64,
    m: usize,
    shape: Vec<usize>,
    spacing: Vec<u64>,
    origin: Vec<u64>,
}

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<Calibration>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<Calibration>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Fit `c_{p,m} = m · c_p` from the measured bounds of the discrete Cauchy
/// transform on `grid`: `c_p` is the largest ratio
/// `sup|T(f 1_{D_δ})| / (‖f‖_{L^p(D_δ)} φ_p(δ))` over dyadic radii and two
/// probes, the constant and the Hölder extremal `ξ|ξ|^{-q}`. Results are
/// cached per `(p, m, grid)`, computed once per key.
pub fn calibrate(p: f64, m: usize, grid: &Arc<ComplexGrid>) -> Result<Arc<Calibration>> {
    let exp = Exponent::new(p)?;
    if let Exponent::Finite(v) = exp {
        if v <= 2.0 {
            return Err(DbarError::UnsupportedExponent(v));
        }
    }
    let key = CacheKey {
        p: exp.value().to_bits(),
        m,
        shape: grid.shape().to_vec(),
        spacing: grid.spacing().iter().map(|s| s.to_bits()).collect(),
        origin: grid.origin().iter().map(|s| s.to_bits()).collect(),
    };
    if let Some(hit) = cache().read().expect("calibration cache").get(&key) {
        return Ok(hit.clone());
    }
    if grid.nvars() != 1 {
        return Err(DbarError::InvalidInput("calibration needs a one-variable grid".into()));
    }
    // probes live on a disc centred at the origin covering the lattice
    let centred = Arc::new(ComplexGrid::from_parts(
        Domain::disc(C64::new(0.0, 0.0), inscribed_radius(grid)),
        grid.origin().to_vec(),
        grid.spacing().to_vec(),
        grid.shape().to_vec(),
        None,
    )?);
    let q = exp.conjugate();
    let probes = [
        Field::constant(centred.clone(), C64::new(1.0, 0.0)),
        Field::from_fn(centred.clone(), move |z| {
            let r = z[0].norm();
            if r == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                z[0] * r.powf(-q)
            }
        }),
    ];
    let mut deltas = default_deltas(&centred);
    if deltas.len() < 4 {
        // coarse lattices: half-dyadic radii
        let r = inscribed_radius(grid);
        deltas = (0..4).map(|k| r * 0.5f64.powf(0.5 * k as f64)).collect();
    }
    let mut ratios = Vec::new();
    for f in &probes {
        let rep = verify_cauchy_estimates(f, exp.value(), Some(&deltas))?;
        ratios.push(
            rep.deltas
                .iter()
                .zip(rep.measured_sup.iter().zip(&rep.lp_norms))
                .map(|(&d, (&s, &n))| s / (n * phi(exp, d)))
                .collect::<Vec<f64>>(),
        );
    }
    let c_p = ratios.iter().flatten().copied().fold(0.0, f64::max);
    let cal = Arc::new(Calibration {
        c_p,
        c_pm: m as f64 * c_p,
        analytic_cp: analytic_cp(exp),
        deltas,
        ratios,
    });
    let mut w = cache().write().expect("calibration cache");
    Ok(w.entry(key).or_insert(cal).clone())
}

fn inscribed_radius(grid: &ComplexGrid) -> f64 {
    let (o, s, n) = (grid.origin(), grid.spacing(), grid.shape());
    (0..2)
        .map(|a| (-o[a]).min(o[a] + (n[a] - 1) as f64 * s[a]))
        .fold(f64::INFINITY, f64::min)
}
