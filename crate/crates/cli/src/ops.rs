//! Dispatch from an operation to the core library.

use std::sync::Arc;

use dbar_core::factor::{
    check_isolated_zeros, counterexample_field, dbar_log_coefficient, integrating_factor_matrix,
    integrating_factor_scalar, integrating_factor_tiled, manufactured_system, trivial_extension,
    ContractionParams, OUTER_RADIUS, TABLE_EXPONENTS,
};
use dbar_core::grid::format::{encode, read_field};
use dbar_core::grid::{lp_norm, mollify, ComplexGrid, Domain, Field, MollifierSpec, OneForm};
use dbar_core::removability::{
    disc_family, jhol_residual, poisson_extend, rado_subharmonic, riesz_decompose,
    theorem_b_pipeline, ChirkaPotential, Verdict,
};
use dbar_core::transforms::dbar::interior;
use dbar_core::transforms::{
    beltrami_solve, beurling_transform_on, cauchy_transform, cauchy_transform_on, dbar, dzbar,
    newton_potential, padded_grid, smooth_test_function, verify_cauchy_estimates, BeltramiProblem,
};
use dbar_core::zeroset::{
    count_zeros_slice, dbar_closedness_test, discriminant_h, distance_comparison,
    track_zero_graphs, vanishing_order, weierstrass_reconstruct, winding_number,
};
use dbar_core::C64;
use serde_json::json;

use crate::artifacts::{Outcome, Table};
use crate::config::{Operation, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::input::{Context, FieldInput};

/// Allowed deviation of a fitted estimate exponent.
const EXPONENT_SLACK: f64 = 0.1;
/// Largest error of the disc-potential oracle, relative to `sup |T χ| = 1`.
const DISC_POTENTIAL_TOL: f64 = 0.01;
/// Default tolerance of the `∂̄T = I` check at the finest resolution.
const DBAR_INVERSE_TOL: f64 = 0.02;
const DEFAULT_COUNTEREXAMPLE_RES: usize = 256;
const DEFAULT_DISC_RES: usize = 256;

fn summary(f: &Field) -> serde_json::Value {
    json!({
        "max_modulus": f.max_modulus(),
        "l2": lp_norm(f, 2.0, None).unwrap_or(f64::NAN),
        "rows": f.rows(),
        "cols": f.cols(),
        "shape": f.grid().shape(),
    })
}

fn padded(grid: &Arc<ComplexGrid>, pad: usize) -> Arc<ComplexGrid> {
    if pad == 0 {
        grid.clone()
    } else {
        Arc::new(padded_grid(grid, pad))
    }
}

fn form_from(parts: Vec<Field>) -> Result<OneForm> {
    Ok(OneForm::new(parts)?)
}

pub fn run(cfg: &ScenarioConfig, ctx: &Context) -> Result<Outcome> {
    let grid = cfg.grid.as_ref().map(|g| g.build()).transpose()?.map(Arc::new);
    let need = || {
        grid.clone()
            .ok_or_else(|| CliError::Config(format!("operation `{}` needs a `grid`", cfg.op.name())))
    };
    let field = |input: &FieldInput| -> Result<Field> { input.eval(&need()?, ctx) };
    use Operation::*;
    Ok(match &cfg.op {
        Cauchy { input, pad } => {
            let f = field(input)?;
            let t = cauchy_transform_on(&f, padded(f.grid_arc(), *pad))?;
            Outcome::new(true, summary(&t))?.field("cauchy", t)
        }
        Beurling { input, pad } => {
            let f = field(input)?;
            let s = beurling_transform_on(&f, padded(f.grid_arc(), *pad))?;
            Outcome::new(true, summary(&s))?.field("beurling", s)
        }
        Newton { input, pad } => {
            let f = field(input)?;
            let n = newton_potential(&f, padded(f.grid_arc(), *pad))?;
            Outcome::new(true, summary(&n))?.field("newton", n)
        }
        Dbar { input } => {
            let f = field(input)?;
            let form = dbar(&f);
            let mut out = Outcome::new(true, json!({ "components": form.components().len() }))?;
            for (j, c) in form.into_components().into_iter().enumerate() {
                out = out.field(&format!("dbar_{}", j + 1), c);
            }
            out
        }
        Mollify { input, delta } => {
            let m = mollify(&field(input)?, MollifierSpec::new(*delta))?;
            Outcome::new(true, summary(&m))?.field("mollified", m)
        }
        Beltrami { alpha, g, holomorphic_dz, r } => {
            let mut problem = BeltramiProblem::new(field(alpha)?, field(g)?);
            if let Some(d) = holomorphic_dz {
                problem = problem.with_holomorphic_dz(field(d)?);
            }
            if let Some(r) = r {
                problem = problem.with_exponent(*r);
            }
            let c0 = problem.c0();
            let sol = beltrami_solve(&problem)?;
            let pass = sol.ratio <= c0 * sol.epsilon_r * 1.05 || sol.iterations <= 1;
            Outcome::new(
                pass,
                json!({
                    "c0": c0,
                    "ratio": sol.ratio,
                    "epsilon_r": sol.epsilon_r,
                    "iterations": sol.iterations,
                    "residuals": sol.residuals,
                }),
            )?
            .field("u", sol.u)
            .field("u_zbar", sol.u_zbar)
        }
        Estimates { input, p, deltas } => {
            let r = verify_cauchy_estimates(&field(input)?, *p, deltas.as_deref())?;
            let pass = !r.degenerate
                && match r.profile_fit_error {
                    Some(e) => e <= EXPONENT_SLACK,
                    None => (r.fitted_exponent - r.expected_exponent).abs() <= EXPONENT_SLACK,
                };
            let mut t = Table::new(&["delta", "sup", "lp_norm"]);
            for k in 0..r.deltas.len() {
                t.rows.push(vec![r.deltas[k], r.measured_sup[k], r.lp_norms[k]]);
            }
            Outcome::new(pass, &r)?.table("estimates", t)
        }
        DiscPotential { pad } => disc_potential(grid.clone(), pad.unwrap_or(32))?,
        ScalarFactor { f, a, p } => {
            let f = field(f)?;
            let form = form_from(vec![field(a)?])?;
            let params = ContractionParams::calibrated(*p, &form)?;
            let s = integrating_factor_scalar(&f, &form, &params)?;
            let zeros = check_isolated_zeros(&f, &s.factor);
            let pass = zeros.isolated || zeros.zeros.is_empty();
            Outcome::new(pass, json!({ "factor": &s, "zeros": zeros }))?
                .field("u", s.u)
                .field("factor", s.factor)
        }
        MatrixFactor { f, a, p, tiled } => {
            let f = field(f)?;
            let form = form_from(a.iter().map(&field).collect::<Result<_>>()?)?;
            let params = ContractionParams::calibrated(*p, &form)?;
            if *tiled {
                let t = integrating_factor_tiled(&f, &form, &params)?;
                let pass = t.tiles.iter().all(|x| x.report.g_norm <= x.report.g_bound);
                Outcome::new(pass, &t)?
            } else {
                matrix_outcome(&f, &form, &params, &[])?
            }
        }
        Manufactured { scale, p } => {
            let s = manufactured_system(&need()?, cfg.seed.unwrap_or(ctx.seed), *scale)?;
            let params = ContractionParams::calibrated(*p, &s.a)?;
            matrix_outcome(&s.f, &s.a, &params, &s.zeros)?.field("f", s.f)
        }
        TrivialExtension { f, p, m } => {
            let f = field(f)?;
            let a = dbar_log_coefficient(&f)?;
            let ext = trivial_extension(&f, &a, *p, *m)?;
            let mut out = Outcome::new(!ext.report.violation, &ext.report)?;
            for (j, c) in ext.b.into_components().into_iter().enumerate() {
                out = out.field(&format!("b_{}", j + 1), c);
            }
            out
        }
        IsolatedZeros { f, factor } => {
            let f = field(f)?;
            let big = match factor {
                Some(x) => field(x)?,
                None => f.clone(),
            };
            let z = check_isolated_zeros(&f, &big);
            Outcome::new(z.isolated || z.identically_zero || z.zeros.is_empty(), &z)?
        }
        SliceCount { f, eps0 } => {
            let c = count_zeros_slice(&field(f)?, *eps0)?;
            Outcome::new(true, &c)?
        }
        Winding { f, center, radius } => {
            let w = winding_number(&field(f)?, *center, *radius)?;
            Outcome::new(true, json!({ "winding": w }))?
        }
        TrackZeros { f, eps0 } => {
            let chart = track_zero_graphs(&field(f)?, *eps0)?;
            let h = discriminant_h(&chart);
            Outcome::new(true, &chart)?.field("discriminant", h)
        }
        Weierstrass { f, eps0 } => {
            let chart = track_zero_graphs(&field(f)?, *eps0)?;
            let w = weierstrass_reconstruct(&chart)?;
            let mut out = Outcome::new(true, &w)?;
            for (j, c) in w.coefficients.into_iter().enumerate() {
                out = out.field(&format!("e_{}", j + 1), c);
            }
            out
        }
        GraphDistance { f, eps0 } => {
            let f = field(f)?;
            let chart = track_zero_graphs(&f, *eps0)?;
            let d = distance_comparison(&f, &chart)?;
            Outcome::new(d.ordered, &d)?
        }
        Closedness { f, eps0, b, eps, seeds } => {
            let chart = track_zero_graphs(&field(f)?, *eps0)?;
            let form = form_from(vec![field(&b[0])?, field(&b[1])?])?;
            let r = dbar_closedness_test(&form, &chart, eps, *seeds)?;
            Outcome::new(r.pass, &r)?
        }
        VanishingOrder { f, point } => {
            let v = vanishing_order(&field(f)?, *point)?;
            Outcome::new(true, &v)?
        }
        Rado { v, e } => {
            let r = rado_subharmonic(&field(v)?, e);
            Outcome::new(r.pass, &r)?
        }
        Poisson { u, e, center, radius } => {
            let ext = poisson_extend(&field(u)?, e, *center, *radius)?;
            Outcome::new(true, &ext)?.field("extension", ext.field)
        }
        Riesz { g, e } => {
            let d = riesz_decompose(&field(g)?, e)?;
            let pass = d.e_mass <= d.single_cell_mass * (1.0 + 1e-9);
            Outcome::new(pass, &d)?.field("density", d.density).field("harmonic", d.h)
        }
        Chirka { center, a, discs, family, resolution } => {
            let rho = ChirkaPotential::new(center.clone(), *a)?;
            let mut all = discs.clone();
            if let Some(fam) = family {
                all.extend(disc_family(center, fam.count, fam.seed.unwrap_or(ctx.seed)));
            }
            if all.is_empty() {
                return Err(CliError::Config("chirka needs `discs` or a `family`".into()));
            }
            let r = rho.psh_report(&all, *resolution)?;
            Outcome::new(r.pass, &r)?
        }
        Jhol { v, structure } => {
            let r = jhol_residual(&field(v)?, structure)?;
            Outcome::new(true, &r)?.field("residual", r.residual).field("c", r.c)
        }
        Pipeline { u, e, structure } => {
            let r = theorem_b_pipeline(&field(u)?, e, structure)?;
            Outcome::new(r.verdict == Verdict::Removable, &r)?
        }
        FieldRoundtrip { path } => {
            let full = ctx.resolve(path);
            let original = std::fs::read(&full)?;
            let (f, kind) = read_field(&full)?;
            let again = encode(&f, kind);
            let identical = again == original;
            Outcome::new(identical, json!({ "bytes": original.len(), "identical": identical }))?
        }
        DbarInverse { resolutions, seeds, tolerance } => {
            dbar_inverse(resolutions, seeds, tolerance.unwrap_or(DBAR_INVERSE_TOL))?
        }
        Counterexample { k, p } => {
            let g = match grid.clone() {
                Some(g) => g,
                None => Arc::new(ComplexGrid::build(
                    Domain::disc(C64::new(0.0, 0.0), OUTER_RADIUS),
                    DEFAULT_COUNTEREXAMPLE_RES,
                )?),
            };
            counterexample(*k, *p, &g)?
        }
    })
}

fn matrix_outcome(f: &Field, form: &OneForm, params: &ContractionParams, zeros: &[C64]) -> Result<Outcome> {
    let m = integrating_factor_matrix(f, form, params)?;
    // winding counts of f and (I + g) f around every known zero
    let mut agree = true;
    let mut windings = Vec::new();
    let f0 = f.component(0, 0);
    let big0 = m.factor.component(0, 0);
    for z in zeros {
        let a = winding_number(&f0, *z, 0.05)?;
        let b = winding_number(&big0, *z, 0.05)?;
        agree &= a == b;
        windings.push([a, b]);
    }
    let pass = m.fixed_point_residual <= 1e-8 && m.g_norm <= m.g_bound && agree;
    Ok(Outcome::new(pass, json!({ "factor": &m, "zeros": zeros, "windings": windings }))?
        .field("g", m.g)
        .field("factor", m.factor))
}

fn disc_potential(grid: Option<Arc<ComplexGrid>>, pad: usize) -> Result<Outcome> {
    let g = match grid {
        Some(g) => g,
        None => Arc::new(ComplexGrid::build(Domain::unit_disc(), DEFAULT_DISC_RES)?),
    };
    if g.domain() != &Domain::unit_disc() {
        return Err(CliError::Config("disc-potential runs on the unit disc".into()));
    }
    let one = Field::constant(g.clone(), C64::new(1.0, 0.0));
    let big = padded(&g, pad);
    let t = cauchy_transform_on(&one, big.clone())?;
    let h = g.max_spacing();
    let mut worst = 0.0f64;
    let mut ring = 0;
    let mut err = vec![C64::new(0.0, 0.0); big.len()];
    for (i, e) in err.iter_mut().enumerate() {
        let z = big.z(i);
        if (z.norm() - 1.0).abs() < 2.0 * h {
            ring += 1;
            continue;
        }
        let exact = if z.norm() < 1.0 { z.conj() } else { 1.0 / z };
        *e = t.at(i) - exact;
        worst = worst.max(e.norm());
    }
    let err = Field::scalar(big, err)?;
    Outcome::new(
        worst <= DISC_POTENTIAL_TOL,
        json!({ "max_error": worst, "tolerance": DISC_POTENTIAL_TOL, "ring_cells_excluded": ring }),
    )
    .map(|o| o.field("potential", t).field("error", err))
}

fn dbar_inverse(resolutions: &[usize], seeds: &[u64], tol: f64) -> Result<Outcome> {
    if resolutions.len() < 2 || seeds.is_empty() {
        return Err(CliError::Config("dbar-inverse needs two or more resolutions and a seed".into()));
    }
    let mut t = Table::new(&["seed", "resolution", "relative_error"]);
    let mut pass = true;
    let mut orders = Vec::new();
    for &seed in seeds {
        let mut errs = Vec::new();
        for &res in resolutions {
            let g = Arc::new(ComplexGrid::build(Domain::unit_disc(), res)?);
            let f = smooth_test_function(&g, seed);
            let back = dzbar(&cauchy_transform(&f)?, 0);
            let inner = interior(&g, 1);
            let e = lp_norm(&back.sub(&f)?, 2.0, Some(&inner))? / lp_norm(&f, 2.0, Some(&inner))?;
            t.rows.push(vec![seed as f64, res as f64, e]);
            errs.push(e);
        }
        let (r0, r1) = (resolutions[0] as f64, *resolutions.last().unwrap() as f64);
        let order = (errs[0] / errs[errs.len() - 1]).ln() / (r1 / r0).ln();
        pass &= *errs.last().unwrap() <= tol && order >= 1.0;
        orders.push(order);
    }
    Outcome::new(pass, json!({ "orders": orders, "tolerance": tol })).map(|o| o.table("dbar_inverse", t))
}

fn counterexample(k: usize, p: Option<f64>, g: &Arc<ComplexGrid>) -> Result<Outcome> {
    let c = counterexample_field(k, g)?;
    let zeros = check_isolated_zeros(&c.f, &c.f);
    let mut t = Table::new(&["rho", "norm"]);
    let exps: Vec<f64> = match p {
        Some(p) => {
            if !TABLE_EXPONENTS.contains(&p) {
                return Err(CliError::Config(format!("p must be one of {TABLE_EXPONENTS:?}")));
            }
            vec![p]
        }
        None => TABLE_EXPONENTS.to_vec(),
    };
    let mut pass = c.max_modulus_core <= c.core_bound;
    for &q in &exps {
        if q == 2.0 {
            pass &= c.table.cauchy_like(q);
        } else {
            pass &= c.table.unbounded_growth(q);
        }
    }
    if let [q] = exps[..] {
        for (rho, n) in c.table.rhos.iter().zip(c.table.row(q).unwrap_or(&[]).iter().copied()) {
            t.rows.push(vec![*rho, n]);
        }
    } else {
        t = Table::new(&["rho", "p2", "p3", "p4"]);
        for (j, rho) in c.table.rhos.iter().enumerate() {
            let mut row = vec![*rho];
            row.extend(exps.iter().map(|&q| c.table.row(q).map_or(f64::NAN, |r| r[j])));
            t.rows.push(row);
        }
    }
    if k > 0 {
        pass &= zeros.accumulation;
    }
    Ok(Outcome::new(pass, json!({ "counterexample": &c, "zeros": zeros }))?
        .table("norms", t)
        .field("f", c.f))
}
